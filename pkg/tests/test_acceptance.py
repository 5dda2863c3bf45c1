"""Acceptance criteria, one pass/fail line each.

Run with pytest, or directly as a script: python tests/test_acceptance.py
"""
import json
import math
import os
import sys

import mpmath as mp
import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402
from acceptance_log import criterion  # noqa: E402
from energy_spectrum import cli, conformal, energy, fuchsian, harmonic, hypgeo, recovery  # noqa: E402
from energy_spectrum.hypgeo import MoebiusMap  # noqa: E402

TOL_MARGIN = -1e-9


def _octagon():
    return fuchsian.genus2_octagon_rep(), fuchsian.octagon_curve_pairs()


def test_trace_length_consistency():
    with criterion(1, "trace-length consistency on 1e4 loxodromic matrices", 1.0) as c:
        rng = np.random.default_rng(11)
        mats = rng.normal(size=(30_000, 2, 2)) * np.exp(rng.uniform(-2, 2, (30_000, 1, 1)))
        det = np.linalg.det(mats)
        mats[det < 0, :, 0] *= -1
        mats /= np.sqrt(np.abs(det))[:, None, None]
        keep = (np.abs(det) >= 1e-3) & (np.abs(np.trace(mats, axis1=1, axis2=2)) >= 2.001)
        mats = mats[keep][:10_000]
        assert len(mats) == 10_000
        tr = np.abs(np.trace(mats, axis1=1, axis2=2))
        by_trace = 2 * np.arccosh(tr / 2)
        pkg = np.array([hypgeo.translation_length(MoebiusMap.from_matrix(m)) for m in mats])
        by_eig = 2 * np.log(np.abs(np.linalg.eigvals(mats)).max(1))
        err = float(np.max(np.abs(pkg - by_trace)))
        err_eig = float(np.max(np.abs(by_eig - by_trace)))
        c.require(err <= 1e-10, f"max |2 log|lam| - 2 arccosh(|tr|/2)| = {err:.2e} <= 1e-10")
        c.require(err_eig <= 1e-10, f"eigensolver route agrees to {err_eig:.2e}")


def test_twist_growth():
    with criterion(2, "twist growth slopes of the octagon representation, N = 50", 5.0) as c:
        rep, pairs = _octagon()
        for i in (1, 2):
            ts = recovery.twist_slope(rep, pairs[i], n_max=50)
            target = i * ts.gamma_length
            rel = abs(ts.slope_hat - target) / target
            c.require(rel <= 0.01, f"i={i} slope {ts.slope_hat:.6f} vs {target:.6f} (rel {rel:.1e})")
            c.require(ts.residual_constant > 0 and ts.decay_holds,
                      f"i={i} residuals within K'|lam|^-2n, K' = {ts.residual_constant:.3g}")


def test_eigenvalue_asymptotics():
    with criterion(3, "eigenvalue asymptotics against a 200-digit product oracle, n <= 30", 5.0) as c:
        rep, pairs = _octagon()
        ns = np.arange(1, 31)
        for i in (1, 2):
            pair = pairs[i]
            ts = recovery.twist_slope(rep, pair, n_max=50)
            co = fuchsian.pair_coefficients(rep, pair)
            lam = complex(co["lam"])
            gamma = np.diag([lam, 1 / lam])
            with mp.workdps(200):
                if i == 1:
                    mu = [oracles.twisted_normalized_eigenvalue(gamma, eta=co["eta"], n=int(n)) for n in ns]
                    coef = oracles.mp_matrix(co["eta"])[0, 0]
                else:
                    mu = [oracles.twisted_normalized_eigenvalue(gamma, sigma=co["sigma"], nu=co["nu"], n=int(n))
                          for n in ns]
                    coef = oracles.mp_matrix(co["sigma"])[0, 1] * oracles.mp_matrix(co["nu"])[1, 0]
                coef_gap = abs(complex(coef) - ts.coefficient) / abs(ts.coefficient)
                c.require(coef_gap <= 1e-12, f"i={i} leading coefficient matches oracle (rel {coef_gap:.1e})")
                defects = np.array([float(abs(m - coef)) for m in mu])
            decay = np.abs(lam) ** (-2.0 * ns)
            ratio = defects / decay
            bounded = bool(np.all(defects <= ts.defect_constant * decay * 1.01))
            c.require(bounded, f"i={i} oracle defects <= K|lam|^-2n with K = {ts.defect_constant:.4g} "
                               f"(max ratio {ratio.max():.4g})")
            # the normalized defect settles to a constant
            settle = abs(ratio[-1] / ratio[-2] - 1)
            c.require(settle < 1e-3, f"i={i} defect |lam|^2n converges (last step {settle:.1e})")
            pkg = recovery.normalized_top_eigenvalue(co, pair, ns)
            gap = float(np.max(np.abs(pkg - np.array([complex(m) for m in mu]))))
            c.require(gap <= 1e-12, f"i={i} closed-form eigenvalue matches oracle to {gap:.1e}")


def test_collar_inequality():
    with criterion(4, "collar inequality on 1e4 flat tori and equality on the square torus", 1.0) as c:
        rng = np.random.default_rng(4)
        worst = np.inf
        for _ in range(10_000):
            tau = complex(rng.uniform(-2, 2), rng.uniform(0.1, 3))
            while True:
                pq, rs = tuple(rng.integers(-6, 7, 2)), tuple(rng.integers(-6, 7, 2))
                if math.gcd(*pq) == 1 and math.gcd(*rs) == 1:
                    break
            res = conformal.collar_check(conformal.torus_extremal_length(tau, pq),
                                         conformal.torus_extremal_length(tau, rs),
                                         conformal.torus_intersection(pq, rs))
            worst = min(worst, res.margin)
        c.require(worst >= TOL_MARGIN, f"worst margin {worst:.3e} >= -1e-9")
        sq = conformal.collar_check(conformal.torus_extremal_length(1j, (1, 0)),
                                    conformal.torus_extremal_length(1j, (0, 1)), 1)
        c.require(abs(sq.margin) <= 1e-12, f"square torus margin {sq.margin:.1e}")


def test_glued_square_family():
    with criterion(5, "glued-square family bounds", 1.0) as c:
        deltas = np.geomspace(0.2, 1e-6, 60)
        product = np.array([conformal.glued_square_bounds(conformal.GluedSquareParams(d)).product_upper
                            for d in deltas])
        closed_form = 1 / ((1 - 2 * deltas) * (0.25 - deltas))
        c.require(np.allclose(product, closed_form, rtol=1e-14, atol=0), "product matches the closed form")
        excess = product - 4
        c.require(bool(np.all(excess > 0)), "product_upper - 4 > 0")
        c.require(bool(np.all(np.diff(excess) < 0)), "decreasing as the slit shrinks")
        model = conformal.xk_family(True, 100)
        gap = model.bounds.product_upper - 4
        c.require(gap <= 0.01, f"k=100: product_upper - 4 = {gap:.2e} <= 0.01")
        for k in (1, 10, 100, 1000):
            eps = conformal.xk_family(True, k).bounds.eps_achieved
            c.require(eps <= 1 / k, f"k={k}: eps {eps:.3e} <= {1 / k:g}")


def test_test_map_energy():
    with criterion(6, "twisted collar energy vs quadrature, 100-point sweep", 5.0) as c:
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(100):
            m = rng.uniform(0.2, 4)
            par = energy.TwistedMapParams(int(rng.integers(0, 200)), m, rng.uniform(0.01, 0.45) * m,
                                          rng.uniform(0.05, 5))
            exact = energy.kn_collar_energy(par)
            quad = oracles.strip_map_energy(par.n, par.modulus, par.inset, par.length)
            worst = max(worst, abs(quad - exact) / exact)
        c.require(worst <= 1e-10, f"worst relative error {worst:.2e} <= 1e-10")


def test_sandwich_consistency():
    with criterion(7, "sandwich consistency and twisted collar tau inside the sandwich", 5.0) as c:
        rng = np.random.default_rng(7)
        checked = 0
        bad = 0
        for _ in range(10_000):
            i = int(rng.integers(1, 4))
            eg, ee = np.exp(rng.uniform(-3, 3, 2))
            sw = recovery.sandwich(eg, ee, i, rng.uniform(0.01, 5))
            if conformal.collar_check(eg, ee, i).holds:
                checked += 1
                bad += sw.lower > sw.upper
        c.require(bad == 0 and checked > 1000, f"lower <= upper on {checked} collar-valid configurations")
        worst = np.inf
        for _ in range(300):
            i = int(rng.integers(1, 3))
            m = rng.uniform(0.2, 4)
            par0 = dict(modulus=m, inset=rng.uniform(1e-6, 0.3) * m, length=rng.uniform(0.1, 4),
                        constant=rng.uniform(0, 20))
            w = par0["modulus"] - 2 * par0["inset"]
            slack = rng.uniform(0, 0.5)
            sw = recovery.sandwich(1 / w, i * i * w * (1 + slack), i, par0["length"])
            for n in range(10, 201, 10):
                p = energy.TwistedMapParams(n, **par0)
                tau = energy.kn_total_energy(p) / n ** 2
                extra = (0.5 * w * p.length ** 2 + p.constant) / n ** 2
                worst = min(worst, tau - sw.lower, sw.upper + extra - tau)
        c.require(worst >= TOL_MARGIN, f"tau inside [lower, upper + C/n^2] for n >= 10 (margin {worst:.2e})")


def test_recovery():
    with criterion(8, "length recovery: synthetic grid and glued-square interval", 30.0) as c:
        worst = 0.0
        src = lambda k: conformal.xk_family(True, k)  # noqa: E731
        grid = np.linspace(0.1, 10, 5)
        for a in grid:
            for b in grid:
                for cc in grid:
                    res = recovery.recover_length(lambda k, n: a * n * n + b * n + cc, src, 1000, 1, ks=[1])
                    worst = max(worst, abs(res.ell_hat - math.sqrt(2 * a)) / math.sqrt(2 * a))
        c.require(worst <= 0.005, f"synthetic worst relative error {worst:.1e} <= 0.5%")

        ell, const, inset = 1.5, 7.0, 1e-9

        def oracle(k, n):
            m = 1 / src(k).bounds.gamma_upper
            return energy.kn_total_energy(energy.TwistedMapParams(n, m, inset * m, ell, const))

        res = recovery.recover_length(oracle, src, 1000, 100)
        rel = (res.interval[1] - res.interval[0]) / res.ell_hat
        c.require(rel <= 0.02, f"k=100 interval width {rel:.3%} of ell_hat <= 2%")
        # the test map only fills width (1 - 2 inset) of the collar, so its tau
        # overshoots the minimal one by 1 / (1 - 2 inset); undo that before comparing
        lo = res.interval[0] * math.sqrt(1 - 2 * inset)
        c.require(lo <= ell * (1 + 1e-12) and ell <= res.interval[1], f"interval {res.interval} contains {ell} up to the strip bias")


def test_harmonic_floor():
    with criterion(9, "harmonic solver on the identity structure, levels 3 and 4", 600.0) as c:
        rep = fuchsian.genus2_octagon_rep()
        area = energy.area_lower_bound(2)
        results = [harmonic.minimize(harmonic.build_mesh(lev), rep) for lev in (3, 4)]
        for lev, r in zip((3, 4), results):
            rel = abs(r.energy / area - 1)
            c.require(rel <= 0.02, f"level {lev}: {r.energy:.6f} within {rel:.2%} of 4 pi")
            c.require(r.converged, f"level {lev} converged in {r.iterations} sweeps")
            rise = float(np.max(np.diff(r.trace) - r.roundoff))
            c.require(rise <= 0, f"level {lev}: every sweep nonincreasing (max step {rise:.1e})")
        drop = results[0].energy - results[1].energy
        c.require(drop >= -1e-8, f"refinement lowers the energy by {drop:.4f}")


def test_thin_triangles():
    with criterion(10, "thin-triangle lemmas at the sampled delta", 60.0) as c:
        delta = hypgeo.rips_delta_estimate(100_000, seed=0).delta
        c.require(abs(delta - 2 * math.asinh(0.5)) < 0.05, f"delta = {delta:.6f}")
        rng = np.random.default_rng(10)
        x, y, z = hypgeo.sample_obtuse_triangles(rng, 100_000)
        worst = float(np.min(hypgeo.obtuse_margins(x, y, z, delta)))
        c.require(worst >= TOL_MARGIN, f"1e5 obtuse triangles, worst margin {worst:.3f}")
        worst = np.inf
        for _ in range(10_000):
            segs = int(rng.integers(1, 7))
            lengths = 0.05 + 2.45 * rng.random(segs)
            path = hypgeo.stairstep_path(lengths, 1j, 2 * np.pi * rng.random(), int(rng.choice([-1, 1])))
            worst = min(worst, hypgeo.check_stairstep(path, delta).margin)
        c.require(worst >= TOL_MARGIN, f"1e4 stairstep paths, worst margin {worst:.3e}")


def _run_cli(kind, cfg, out):
    path = out / "config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(cfg))
    code = cli.main([kind, "--config", str(path), "--out", str(out)])
    return code, {p.name: p.read_bytes() for p in sorted(out.rglob("*.csv"))}


def test_determinism(tmp_path=None):
    import tempfile
    from pathlib import Path

    base = Path(tmp_path) if tmp_path is not None else Path(tempfile.mkdtemp())
    configs = {
        "verify": {"experiment": "verify", "seed": 123,
                   "representation": {"builtin": "octagon", "perturb": 0.01},
                   "params": {"samples": 500, "delta_samples": 2000, "paths": 50, "harmonic": False}},
        "twist-growth": {"experiment": "twist-growth", "seed": 5, "pairs": [1, 2]},
        "recover": {"experiment": "recover", "params": {"n_max": 200, "k_max": 10}},
        "energy-bounds": {"experiment": "energy-bounds"},
    }
    with criterion(11, "CLI re-runs with the same seed give byte-identical CSVs") as c:
        for kind, cfg in configs.items():
            code1, first = _run_cli(kind, cfg, base / kind / "a")
            code2, second = _run_cli(kind, cfg, base / kind / "b")
            c.require(code1 == code2 == 0 and first and first == second,
                      f"{kind}: {len(first)} CSV(s) identical (exit {code1}, {code2})")
        code, again = _run_cli_manifest(base / "verify" / "a" / "manifest.json", base / "verify" / "c")
        c.require(code == 0 and again == _csvs(base / "verify" / "a"), "verify re-run from its manifest matches")


def _csvs(out):
    return {p.name: p.read_bytes() for p in sorted(out.rglob("*.csv"))}


def _run_cli_manifest(manifest, out):
    code = cli.main(["verify", "--config", str(manifest), "--out", str(out)])
    return code, _csvs(out)


if __name__ == "__main__":
    order = [test_trace_length_consistency, test_twist_growth, test_eigenvalue_asymptotics,
             test_collar_inequality, test_glued_square_family, test_test_map_energy,
             test_sandwich_consistency, test_recovery, test_harmonic_floor, test_thin_triangles,
             test_determinism]
    failed = 0
    for fn in order:
        try:
            fn()
        except Exception:
            failed += 1
    sys.exit(1 if failed else 0)
