"""Batch driver: `energy-spectrum <subcommand> --config cfg.json [--out dir]`.

Exit status: 0 success, 1 a checked property failed, 2 invalid config,
3 I/O failure. Every run writes CSV/JSON results and manifest.json; the
manifest embeds the config (with any --seed override) and can itself be
passed to --config.
"""
from __future__ import annotations

import argparse
import copy
import hashlib
import io
import json
import logging
import os
import platform
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import jsonschema
import numpy as np

from . import conformal, energy, fuchsian, harmonic, hypgeo, recovery
from .errors import ConstructionError, DegenerateConfiguration, InvalidInput, PreconditionError
from .surface_words import CurvePair, rep_length, twist_word

log = logging.getLogger("energy_spectrum")

KINDS = ("twist-growth", "recover", "energy-bounds", "verify", "mesh-solve")
LOG_ENV = "ENERGY_SPECTRUM_LOG"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

_PAIR = {
    "oneOf": [
        {"type": "integer", "enum": [1, 2]},
        {
            "type": "object",
            "required": ["gamma", "eta", "intersection"],
            "properties": {
                "gamma": {"type": "string"}, "eta": {"type": "string"},
                "intersection": {"enum": [1, 2]},
                "sigma": {"type": "string"}, "nu": {"type": "string"},
            },
            "additionalProperties": False,
        },
    ]
}
_MATRIX = {"type": "array", "minItems": 4, "maxItems": 4,
           "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}}
_REP = {
    "oneOf": [
        {"enum": ["octagon"]},
        {
            "type": "object",
            "properties": {
                "builtin": {"enum": ["octagon"]},
                "genus": {"type": "integer", "minimum": 2},
                "generators": {"type": "array", "items": _MATRIX},
                "perturb": {"type": "number", "minimum": 0},
            },
            "oneOf": [{"required": ["builtin"]}, {"required": ["genus", "generators"]}],
            "additionalProperties": False,
        },
    ]
}
_EXPERIMENT_PROPS = {
    "experiment": {"enum": list(KINDS)},
    "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
    "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
    "representation": _REP,
    "pairs": {"type": "array", "items": _PAIR, "minItems": 1},
    "params": {"type": "object"},
}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        **_EXPERIMENT_PROPS,
        "experiments": {
            "type": "array", "minItems": 1,
            "items": {"type": "object", "properties": _EXPERIMENT_PROPS,
                      "required": ["name"], "additionalProperties": False},
        },
    },
    "additionalProperties": False,
}

# defaults per experiment kind; unknown parameter names are rejected
DEFAULT_PARAMS = {
    "twist-growth": {"n_max": 50, "slope_rtol": 0.01},
    "recover": {"source": "glued-square", "oracle": "collar", "n_max": 1000, "k_max": 100,
                "ks": None, "window": None, "corrected": True, "length": 1.5,
                "constant": 7.0, "inset": 1e-9, "coefficients": [1.0, 3.0, 7.0],
                "level": 2, "tol": 1e-8, "width_rtol": 0.02},
    "energy-bounds": {"ks": [1, 10, 100, 1000], "length": 1.0, "separating": True, "slack": None,
                      "n": [1, 10, 100], "inset": 1e-3, "constant": 0.0},
    "verify": {"samples": 10000, "delta_samples": 100000, "paths": 2000, "level": 3,
               "harmonic": True, "n_max": 50},
    "mesh-solve": {"level": 3, "twist": 0, "tol": 1e-8, "max_iter": 100000, "init": "centroid"},
}
SAMPLING = {"verify"}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# output helpers


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def config_hash(cfg) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()


# ---------------------------------------------------------------------------
# config resolution


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if isinstance(cfg, dict) and "manifest_version" in cfg:
        cfg = cfg["config"]  # re-run from a manifest
    return cfg


def resolve(cfg, kind, seed_override=None) -> dict:
    """Validated config with the subcommand and defaults filled in."""
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"schema: {exc.message} at {list(exc.absolute_path)}") from exc
    cfg = copy.deepcopy(cfg)
    if cfg.get("experiment", kind) != kind:
        raise ConfigError(f"config is for {cfg['experiment']!r}, not {kind!r}")
    cfg["experiment"] = kind
    if seed_override is not None:
        cfg["seed"] = int(seed_override)
    items = cfg.get("experiments") or [dict(name=kind)]
    top = {k: v for k, v in cfg.items() if k != "experiments"}
    resolved = []
    names = set()
    for item in items:
        exp = {**top, **item}
        exp["experiment"] = item.get("experiment", kind)
        if seed_override is not None:
            exp["seed"] = int(seed_override)
        if exp["experiment"] not in KINDS:
            raise ConfigError(f"unknown experiment {exp['experiment']!r}")
        if exp["name"] in names:
            raise ConfigError(f"duplicate experiment name {exp['name']!r}")
        names.add(exp["name"])
        params = dict(DEFAULT_PARAMS[exp["experiment"]])
        unknown = set(exp.get("params", {})) - set(params)
        if unknown:
            raise ConfigError(f"unknown params for {exp['experiment']}: {sorted(unknown)}")
        params.update(exp.get("params", {}))
        exp["params"] = params
        rep = exp.get("representation", "octagon")
        exp["representation"] = rep
        perturbed = isinstance(rep, dict) and rep.get("perturb", 0) > 0
        if (exp["experiment"] in SAMPLING or perturbed) and "seed" not in exp:
            raise ConfigError(f"experiment {exp['name']!r} samples randomly and needs a seed")
        exp.setdefault("pairs", [1])
        resolved.append(exp)
    cfg["experiments"] = resolved
    return cfg


def build_rep(spec, seed) -> fuchsian.GroupRep:
    if spec == "octagon":
        spec = {"builtin": "octagon"}
    if "builtin" in spec:
        rep = fuchsian.genus2_octagon_rep()
    else:
        rep = fuchsian.GroupRep.from_json({"genus": spec["genus"], "generators": spec["generators"]})
    if spec.get("perturb", 0) > 0:
        rep = fuchsian.perturb_rep(rep, spec["perturb"], seed=seed)
    return rep


def build_pair(spec, genus) -> CurvePair:
    if isinstance(spec, int):
        if genus != 2:
            raise InvalidInput("builtin curve pairs exist for genus 2 only")
        return fuchsian.octagon_curve_pairs()[spec]
    return CurvePair.from_strings(spec["gamma"], spec["eta"], spec["intersection"],
                                  spec.get("sigma"), spec.get("nu"), genus=genus)


# ---------------------------------------------------------------------------
# experiments


@dataclass
class Outcome:
    files: dict = field(default_factory=dict)  # name -> text
    checks: list = field(default_factory=list)  # (suite, check, value, threshold, passed)
    summary: dict = field(default_factory=dict)

    def check(self, suite, name, value, threshold, passed):
        self.checks.append((suite, name, float(value), float(threshold), bool(passed)))

    @property
    def passed(self) -> bool:
        return all(c[4] for c in self.checks)


def run_twist_growth(exp, threads=1) -> Outcome:
    p = exp["params"]
    rep = build_rep(exp["representation"], exp.get("seed", 0))
    out = Outcome()
    rows = []
    for k, spec in enumerate(exp["pairs"]):
        pair = build_pair(spec, rep.genus)
        res = recovery.twist_slope(rep, pair, int(p["n_max"]))
        target = pair.intersection * res.gamma_length
        for j, n in enumerate(res.ns):
            fit = res.slope_hat * n + res.intercept_hat
            rows.append((k, int(n), res.lengths[j], fit, res.residuals[j], res.defects[j],
                         res.slope_hat, res.intercept_hat, target))
        rel = res.slope_error / target
        out.check("twist-growth", f"pair{k}:slope", rel, p["slope_rtol"], rel <= p["slope_rtol"])
        out.check("twist-growth", f"pair{k}:decay", res.residual_constant, 0,
                  res.decay_holds and res.residual_constant > 0)
        out.summary[f"pair{k}"] = {"slope_hat": res.slope_hat, "target": target,
                                   "bc_prime": res.coefficient, "K": res.defect_constant,
                                   "K_prime": res.residual_constant}
    cols = ("pair", "n", "length", "fit", "residual", "defect", "slope_hat", "intercept_hat", "target")
    out.files["twist_growth.csv"] = csv_text(cols, rows)
    return out


def _surface_source(p):
    src = p["source"]
    if src == "glued-square":
        return lambda k: conformal.xk_family(True, k)
    if src == "slit-torus":
        return lambda k: conformal.xk_family(False, k)
    raise InvalidInput(f"unknown surface source {src!r}")


def run_recover(exp, threads=1) -> Outcome:
    p = exp["params"]
    out = Outcome()
    if p["oracle"] == "harmonic":
        rep = build_rep(exp["representation"], exp.get("seed", 0))
        pair = build_pair(exp["pairs"][0], rep.genus)
        ell = rep_length(rep, pair.gamma)
        lo, up = conformal.hyperbolic_extremal_bounds(ell, energy.area_lower_bound(rep.genus))
        bounds = conformal.ExtremalBounds(up, lo, up, up * up, float("nan"), pair.intersection)
        n_max = min(int(p["n_max"]), 5)

        def oracle(k, n):
            return harmonic.energy_spectrum_estimate(rep, pair, n, level=p["level"], tol=p["tol"]).energy

        res = recovery.recover_length(oracle, lambda k: bounds, n_max, 1, ks=[1],
                                      window=p["window"] or 3, corrected=p["corrected"], threads=threads)
        inside = res.interval[0] <= ell <= res.interval[1]
        out.check("recover", "length_in_interval", ell, 0, inside)
    else:
        source = _surface_source(p)
        ell = float(p["length"])
        if p["oracle"] == "collar":
            def oracle(k, n):
                m = 1.0 / source(k).bounds.gamma_upper
                par = energy.TwistedMapParams(n, m, p["inset"] * m, ell, p["constant"])
                return energy.kn_total_energy(par)
        elif p["oracle"] == "synthetic":
            a, b, c = p["coefficients"]

            def oracle(k, n):
                return a * n * n + b * n + c
        else:
            raise InvalidInput(f"unknown oracle {p['oracle']!r}")
        res = recovery.recover_length(oracle, source, int(p["n_max"]), int(p["k_max"]), ks=p["ks"],
                                      window=p["window"], corrected=p["corrected"], threads=threads)
        rel_width = (res.interval[1] - res.interval[0]) / res.ell_hat
        out.check("recover", "relative_width", rel_width, p["width_rtol"], rel_width <= p["width_rtol"])
    out.check("recover", "flags", len(res.flags), 0, not res.flags)
    out.files["recover.csv"] = csv_text(recovery.CSV_COLUMNS, res.rows())
    out.summary = {"ell_hat": res.ell_hat, "interval": list(res.interval), "flags": res.flags,
                   "reference_length": ell}
    return out


def run_energy_bounds(exp, threads=1) -> Outcome:
    p = exp["params"]
    out = Outcome()
    ell = float(p["length"])
    rows = []
    for k in p["ks"]:
        model = conformal.xk_family(bool(p["separating"]), int(k), p["slack"])
        b = model.bounds
        sw = recovery.sandwich(b.gamma_upper, b.eta_upper, b.intersection, ell)
        collar = conformal.collar_check(b.gamma_upper, b.eta_upper, b.intersection)
        m = 1.0 / b.gamma_upper
        for n in p["n"]:
            par = energy.TwistedMapParams(int(n), m, p["inset"] * m, ell, p["constant"])
            kn = energy.kn_total_energy(par)
            rows.append((k, n, b.eps_achieved, b.gamma_upper, b.gamma_lower, b.eta_upper,
                         b.product_upper, sw.lower, sw.upper, kn, kn / n ** 2))
        out.check("energy-bounds", f"k{k}:eps", b.eps_achieved, 1 / k, b.eps_achieved <= 1 / k * (1 + 1e-12))
        out.check("energy-bounds", f"k{k}:collar", collar.margin, 0, collar.holds)
        out.check("energy-bounds", f"k{k}:sandwich", sw.upper - sw.lower, 0, sw.lower <= sw.upper)
    cols = ("k", "n", "eps_achieved", "gamma_upper", "gamma_lower", "eta_upper", "product_upper",
            "tau_lower", "tau_upper", "kn_energy", "kn_tau")
    out.files["energy_bounds.csv"] = csv_text(cols, rows)
    return out


def _kn_grid_energy(par, nx=64, ny=16, h=1e-6):
    """Midpoint-rule energy of the twisted strip map from finite differences."""
    xs = par.inset + (np.arange(nx) + 0.5) * par.width / nx
    ys = (np.arange(ny) + 0.5) / ny
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    dx = (energy.kn_map_height(par, gx + h, gy) - energy.kn_map_height(par, gx - h, gy)) / (2 * h)
    dy = (energy.kn_map_height(par, gx, gy + h) - energy.kn_map_height(par, gx, gy - h)) / (2 * h)
    return float(np.sum(energy.energy_density_flat(dx, dy)) * par.width / (nx * ny))


def run_verify(exp, threads=1) -> Outcome:
    """Fast versions of the property suites of every module."""
    p = exp["params"]
    seed = int(exp["seed"])
    rng = np.random.default_rng(seed)
    out = Outcome()
    count = int(p["samples"])

    # translation length from eigenvalue vs trace
    mats = rng.normal(size=(count, 2, 2))
    det = np.linalg.det(mats)
    mats[det < 0, :, 0] *= -1
    mats /= np.sqrt(np.abs(np.linalg.det(mats)))[:, None, None]
    tr = np.abs(np.trace(mats, axis1=1, axis2=2))
    lox = tr > 2.01
    ev = np.abs(np.linalg.eigvals(mats[lox])).max(1)
    err = np.max(np.abs(2 * np.log(ev) - 2 * np.arccosh(tr[lox] / 2)))
    out.check("hypgeo", "trace_length", err, 1e-10, err <= 1e-10)

    # thin triangles
    delta = hypgeo.rips_delta_estimate(int(p["delta_samples"]), seed=seed).delta
    x, y, z = hypgeo.sample_obtuse_triangles(rng, count)
    worst = float(np.min(hypgeo.obtuse_margins(x, y, z, delta)))
    out.check("hypgeo", "obtuse_triangles", worst, -1e-9, worst >= -1e-9)
    worst = np.inf
    for _ in range(int(p["paths"])):
        # paths start at i; longer segments push vertices beyond the reach of
        # double-precision upper half-plane coordinates
        segs = rng.integers(1, 7)
        lengths = 0.05 + 2.45 * rng.random(segs)
        path = hypgeo.stairstep_path(lengths, 1j, 2 * np.pi * rng.random(), int(rng.choice([-1, 1])))
        worst = min(worst, hypgeo.check_stairstep(path, delta).margin)
    out.check("hypgeo", "stairstep_paths", worst, -1e-9, worst >= -1e-9)

    # collar inequality on flat tori
    taus = rng.uniform(-2, 2, count) + 1j * rng.uniform(0.2, 3, count)
    worst = np.inf
    for tau in taus[: min(count, 2000)]:
        while True:
            pq = tuple(rng.integers(-5, 6, 2))
            rs = tuple(rng.integers(-5, 6, 2))
            if np.gcd(*pq) == 1 and np.gcd(*rs) == 1:
                break
        res = conformal.collar_check(conformal.torus_extremal_length(tau, pq),
                                     conformal.torus_extremal_length(tau, rs),
                                     conformal.torus_intersection(pq, rs))
        worst = min(worst, res.margin)
    out.check("conformal", "collar_inequality", worst, -1e-9, worst >= -1e-9)
    for k in (1, 10, 100, 1000):
        eps = conformal.xk_family(True, k).bounds.eps_achieved
        out.check("conformal", f"glued_square_k{k}", eps, 1 / k, eps <= 1 / k)

    # test-map energy
    worst = 0.0
    for _ in range(20):
        m = rng.uniform(0.2, 3)
        par = energy.TwistedMapParams(int(rng.integers(0, 50)), m, rng.uniform(0.01, 0.4) * m,
                                      rng.uniform(0.1, 5))
        exact = energy.kn_collar_energy(par)
        worst = max(worst, abs(_kn_grid_energy(par) - exact) / exact)
    out.check("energy", "kn_collar_energy", worst, 1e-6, worst <= 1e-6)

    # representation and twist growth
    rep = build_rep(exp["representation"], seed)
    res = fuchsian.verify_relator(rep)
    out.check("fuchsian", "relator", res, fuchsian.RELATOR_TOL, res <= fuchsian.RELATOR_TOL)
    for spec in exp["pairs"]:
        pair = build_pair(spec, rep.genus)
        ts = recovery.twist_slope(rep, pair, int(p["n_max"]))
        rel = ts.slope_error / (pair.intersection * ts.gamma_length)
        out.check("recovery", f"twist_slope_i{pair.intersection}", rel, 0.01, rel <= 0.01 and ts.decay_holds)

    if p["harmonic"]:
        lev = int(p["level"])
        res = harmonic.minimize(harmonic.build_mesh(lev), rep)
        rel = abs(res.energy / energy.area_lower_bound(rep.genus) - 1)
        out.check("harmonic", f"area_level{lev}", rel, 0.02, rel <= 0.02)
        mono = float(np.max(np.diff(res.trace) - res.roundoff, initial=-np.inf))
        out.check("harmonic", "monotone_sweeps", mono, 0, mono <= 0)
    out.files["verify.csv"] = csv_text(("suite", "check", "value", "threshold", "passed"), out.checks)
    return out


def run_mesh_solve(exp, threads=1) -> Outcome:
    p = exp["params"]
    out = Outcome()
    rep = build_rep(exp["representation"], exp.get("seed", 0))
    pair = build_pair(exp["pairs"][0], rep.genus)
    n = int(p["twist"])
    mesh = harmonic.build_mesh(int(p["level"]), (pair, n) if n else None)
    res = harmonic.minimize(mesh, rep, init=p["init"], tol=p["tol"], max_iter=int(p["max_iter"]))
    slack = harmonic.identity_mesh_slack(mesh.level)
    floor = energy.area_lower_bound(rep.genus) * (1 - slack)
    # Minsky floor through the twisted image of eta and an upper bound on E(eta)
    eta_img = twist_word(pair, n) if pair.intersection == 1 else pair.eta
    ell_eta = rep_length(rep, eta_img)
    _, e_eta = conformal.hyperbolic_extremal_bounds(rep_length(rep, pair.eta), energy.area_lower_bound(rep.genus))
    minsky = energy.minsky_lower_bound(ell_eta, e_eta) if n else 0.0
    out.check("mesh-solve", "area_floor", res.energy - floor, 0, res.energy >= floor)
    out.check("mesh-solve", "minsky_floor", res.energy - minsky, 0, res.energy >= minsky)
    resid = harmonic.equivariance_residual(mesh, res.map)
    out.check("mesh-solve", "equivariance", resid, harmonic.EQUIVARIANCE_TOL, resid <= harmonic.EQUIVARIANCE_TOL)
    out.check("mesh-solve", "converged", float(res.converged), 1, res.converged)
    out.files["trace.csv"] = csv_text(("iteration", "energy"), enumerate(res.trace))
    out.files["mesh.json"] = _json_text(mesh.to_json())
    out.files["map.json"] = _json_text(res.map.to_json())
    out.summary = {"energy": res.energy, "iterations": res.iterations, "roundoff": res.roundoff,
                   "area_floor": floor, "minsky_floor": minsky, "level": mesh.level, "twist": n}
    return out


RUNNERS = {"twist-growth": run_twist_growth, "recover": run_recover,
           "energy-bounds": run_energy_bounds, "verify": run_verify, "mesh-solve": run_mesh_solve}


# ---------------------------------------------------------------------------
# entry point


def _versions():
    out = {"python": platform.python_version(), "numpy": np.__version__}
    for dist in ("artifact", "scipy", "jsonschema"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def run(kind, raw, out_dir, threads=1, seed=None):
    """Run every experiment of a config; returns (exit code, manifest).

    Single-experiment configs write into out_dir, configs with an
    `experiments` list into one subdirectory per experiment name.
    """
    cfg = resolve(raw, kind, seed)
    exps = cfg["experiments"]
    start = time.perf_counter()

    def one(exp):
        return RUNNERS[exp["experiment"]](exp, threads)

    if threads > 1 and len(exps) > 1:
        with ThreadPoolExecutor(threads) as pool:
            outcomes = list(pool.map(one, exps))
    else:
        outcomes = [one(e) for e in exps]
    nested = "experiments" in raw
    written = {}
    for exp, res in zip(exps, outcomes):
        base = out_dir / exp["name"] if nested else out_dir
        files = dict(res.files)
        files["summary.json"] = _json_text({"experiment": exp["experiment"], "passed": res.passed,
                                            "checks": res.checks, **res.summary})
        for name, text in files.items():
            path = base / name
            write_atomic(path, text)
            written[str(path.relative_to(out_dir))] = hashlib.sha256(text.encode()).hexdigest()
    passed = all(o.passed for o in outcomes)
    clean = copy.deepcopy(raw)
    if seed is not None:
        clean["seed"] = int(seed)
    manifest = {
        "manifest_version": 1,
        "subcommand": kind,
        "config": clean,
        "config_sha256": config_hash(clean),
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - start,
        "outputs": written,
        "passed": passed,
        "failed_checks": [c for o in outcomes for c in o.checks if not c[4]],
    }
    write_atomic(out_dir / "manifest.json", _json_text(manifest))
    return (EXIT_OK if passed else EXIT_FAILED), manifest


def build_parser():
    ap = argparse.ArgumentParser(prog="energy-spectrum", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", required=True, help="JSON config or a previous manifest.json")
        sp.add_argument("--out", default="results", help="output directory")
        sp.add_argument("--seed", type=int, help="overrides the config seed")
        sp.add_argument("--threads", type=int, default=1)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get(LOG_ENV, "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        raw = load_config(args.config)
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = resolve(raw, args.kind, args.seed)
        # validate representations and pairs before running anything
        for exp in cfg["experiments"]:
            rep = build_rep(exp["representation"], exp.get("seed", 0))
            for spec in exp["pairs"]:
                build_pair(spec, rep.genus)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, InvalidInput, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, manifest = run(args.kind, raw, Path(args.out), args.threads, args.seed)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidInput as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConstructionError, DegenerateConfiguration, PreconditionError) as exc:
        print(f"error: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    for c in manifest["failed_checks"]:
        print(f"FAILED {c[0]}:{c[1]} value={c[2]:.6g} threshold={c[3]:.6g}", file=sys.stderr)
    return code
