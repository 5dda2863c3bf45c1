"""Length recovery from twisted energies and twist-length growth of words.

Energies of the n-fold twisted structures grow like tau n^2, and the
quadratic rate is pinned between extremal-length bounds times l^2 / 2.
Inverting those bounds turns a tau estimate into a certified length
interval.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConfiguration, InvalidInput
from .fuchsian import pair_coefficients
from .surface_words import CurvePair, rep_length, twist_word

log = logging.getLogger(__name__)

CSV_COLUMNS = ("k", "n", "energy", "tau", "lower", "upper", "ell_hat")
COEFFICIENT_FLOOR = 1e-10


def default_window(n_max: int) -> int:
    return max(5, int(n_max) // 10)


@dataclass(frozen=True)
class TauSeries:
    ns: np.ndarray
    energies: np.ndarray
    window: int | None = None

    def __post_init__(self):
        ns = np.asarray(self.ns, dtype=float)
        en = np.asarray(self.energies, dtype=float)
        if ns.ndim != 1 or ns.shape != en.shape or len(ns) == 0:
            raise InvalidInput("ns and energies must be equal-length 1-d sequences")
        if np.any(ns < 1) or np.any(np.diff(ns) <= 0):
            raise InvalidInput("twist counts must be >= 1 and strictly increasing")
        if not np.all(np.isfinite(en)) or np.any(en < 0):
            raise InvalidInput("energies must be finite and nonnegative")
        w = default_window(ns[-1]) if self.window is None else int(self.window)
        if w < 1:
            raise InvalidInput("window must be positive")
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "energies", en)
        object.__setattr__(self, "window", w)

    @property
    def tau(self) -> np.ndarray:
        return self.energies / self.ns ** 2

    def tail(self):
        if len(self.ns) < self.window:
            raise InvalidInput(f"series has {len(self.ns)} points, window needs {self.window}")
        return self.ns[-self.window:], self.tau[-self.window:]


@dataclass(frozen=True)
class TauEstimates:
    tau_minus: float
    tau_plus: float
    window: int
    corrected: bool = False


def tau_estimates(series: TauSeries) -> TauEstimates:
    """Min and max of tau over the last `window` samples."""
    _, tau = series.tail()
    return TauEstimates(float(tau.min()), float(tau.max()), series.window)


def corrected_tau_estimates(series: TauSeries) -> TauEstimates:
    """Tail min/max after removing the fitted B/n + C/n^2 part of tau.

    At finite n the raw tail of tau carries a bias of order 1/n; fitting
    tau = A + B/n + C/n^2 over the window and subtracting the last two
    terms leaves A plus the fit residuals. Falls back to the raw tail when
    the window has fewer than three points.
    """
    ns, tau = series.tail()
    if len(ns) < 3:
        return tau_estimates(series)
    design = np.stack([np.ones_like(ns), 1 / ns, 1 / ns ** 2], 1)
    coef = np.linalg.lstsq(design, tau, rcond=None)[0]
    flat = tau - coef[1] / ns - coef[2] / ns ** 2
    return TauEstimates(float(flat.min()), float(flat.max()), series.window, True)


@dataclass(frozen=True)
class SandwichBounds:
    lower: float
    upper: float
    collar_ok: bool


def sandwich(e_gamma: float, e_eta: float, intersection: int, length: float,
             tol: float = 1e-9) -> SandwichBounds:
    """Bounds i^2 l^2 / (2 E(eta)) <= tau <= E(gamma) l^2 / 2."""
    if not (e_gamma > 0 and e_eta > 0):
        raise InvalidInput("extremal lengths must be positive")
    if intersection < 1:
        raise InvalidInput("intersection must be >= 1")
    if length < 0:
        raise InvalidInput("length must be nonnegative")
    ok = e_gamma * e_eta >= intersection ** 2 - tol
    if not ok:
        log.warning("collar inequality fails: E(gamma) E(eta) = %.6g < %d",
                    e_gamma * e_eta, intersection ** 2)
    lower = 0.5 * intersection ** 2 * length ** 2 / e_eta
    upper = 0.5 * e_gamma * length ** 2
    return SandwichBounds(lower, upper, ok)


def length_interval(est: TauEstimates, e_gamma_upper: float, e_eta_upper: float,
                    intersection: int) -> tuple[float, float]:
    """Lengths compatible with the sandwich given upper extremal-length bounds."""
    lo = math.sqrt(2 * max(est.tau_plus, 0.0) / e_gamma_upper)
    hi = math.sqrt(2 * max(est.tau_minus, 0.0) * e_eta_upper) / intersection
    return lo, hi


# ---------------------------------------------------------------------------
# recovery over a family of surfaces


@dataclass(frozen=True)
class SurfaceRecovery:
    k: int
    series: TauSeries
    estimates: TauEstimates
    ell_hat: float
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class RecoveryResult:
    ell_hat: float
    interval: tuple
    per_k: tuple
    nested: bool
    shrinking: bool
    flags: list = field(default_factory=list)

    def rows(self):
        """CSV rows (k, n, energy, tau, lower, upper, ell_hat); lower/upper bound the length."""
        for rec in self.per_k:
            for n, e, t in zip(rec.series.ns, rec.series.energies, rec.series.tau):
                yield (rec.k, int(n), float(e), float(t), rec.lower, rec.upper, rec.ell_hat)


def _bounds_of(source, k):
    b = source(k)
    b = getattr(b, "bounds", b)  # an XkModel carries its bounds
    for name in ("gamma_upper", "eta_upper", "intersection"):
        if not hasattr(b, name):
            raise InvalidInput(f"surface source returned an object without {name}")
    return b


def default_ks(k_max: int) -> list:
    ks = [10 ** j for j in range(int(math.log10(k_max)) + 1) if 10 ** j <= k_max]
    return ks if ks[-1] == k_max else ks + [k_max]


def recover_length(oracle, xk_source, n_max: int, k_max: int, ks=None, ns=None,
                   window: int | None = None, corrected: bool = True,
                   threads: int = 1) -> RecoveryResult:
    """Estimate the length of gamma from energies of twisted surfaces.

    oracle(k, n) returns the energy of the n-fold twist of surface k;
    xk_source(k) returns that surface's extremal-length bounds (an
    ExtremalBounds or XkModel). For every k the tail of tau gives
    ell_hat = sqrt(2 tau_plus) and a certified interval from the sandwich.
    The reported estimate is the one at the largest k.
    """
    if n_max < 1 or k_max < 1:
        raise InvalidInput("n_max and k_max must be >= 1")
    ks = default_ks(k_max) if ks is None else sorted(int(k) for k in ks)
    ns = np.arange(1, n_max + 1) if ns is None else np.asarray(ns, dtype=int)
    grid = [(k, int(n)) for k in ks for n in ns]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            values = list(pool.map(lambda kn: float(oracle(*kn)), grid))
    else:
        values = [float(oracle(k, n)) for k, n in grid]
    energies = dict(zip(grid, values))

    per_k = []
    for k in ks:
        series = TauSeries(ns, [energies[k, int(n)] for n in ns], window)
        est = corrected_tau_estimates(series) if corrected else tau_estimates(series)
        b = _bounds_of(xk_source, k)
        lo, hi = length_interval(est, b.gamma_upper, b.eta_upper, b.intersection)
        ell = math.sqrt(2 * max(est.tau_plus, 0.0))
        per_k.append(SurfaceRecovery(k, series, est, ell, lo, hi))

    flags = []
    nested = all(max(a.lower, b.lower) <= min(a.upper, b.upper)
                 for a, b in zip(per_k, per_k[1:]))
    if not nested:
        flags.append("intervals for successive k do not overlap")
    shrinking = per_k[-1].width < per_k[0].width if len(per_k) > 1 else True
    if not shrinking:
        flags.append("interval width does not shrink with k")
    if any(r.estimates.tau_minus <= 0 for r in per_k):
        flags.append("nonpositive tau estimate: the tail fit does not describe the energies")
    if any(r.lower > r.upper for r in per_k):
        flags.append("empty certified interval: tau estimates violate the sandwich")
    for msg in flags:
        log.warning(msg)
    last = per_k[-1]
    return RecoveryResult(last.ell_hat, (last.lower, last.upper), tuple(per_k), nested, shrinking, flags)


# ---------------------------------------------------------------------------
# growth of twisted words under a representation


@dataclass(frozen=True)
class TwistSlope:
    ns: np.ndarray
    lengths: np.ndarray
    slope_hat: float
    intercept_hat: float
    residuals: np.ndarray  # about the least-squares line
    gamma_length: float
    intersection: int
    coefficient: complex  # a (i = 1) or b c' (i = 2)
    lam: complex
    defects: np.ndarray  # |mu_+(n) lam^(-i n) - coefficient|
    defect_constant: float  # K with defects <= K |lam|^(-2n)
    asymptotic_residuals: np.ndarray  # about i l n + 2 log|coefficient|
    residual_constant: float  # K' with asymptotic residuals <= K' |lam|^(-2n)
    decay_holds: bool

    @property
    def slope_error(self) -> float:
        return abs(self.slope_hat - self.intersection * self.gamma_length)


def _top_root(t, c):
    """Root of larger modulus of x^2 - t x + c."""
    disc = np.sqrt(t * t - 4 * c)
    return np.where(np.abs(t + disc) >= np.abs(t - disc), t + disc, t - disc) / 2


def normalized_top_eigenvalue(coeffs: dict, pair: CurvePair, ns) -> np.ndarray:
    """mu_+(n) lam^(-i n) for the twisted word, from diagonal-frame entries.

    i = 1: tr(eta gamma^n) = a lam^n + d lam^-n.
    i = 2: tr(sigma gamma^-n nu gamma^n) = a a' + d d' + lam^2n b c' + lam^-2n c b'.
    Dividing the characteristic polynomial through by lam^(i n) keeps every
    quantity at unit size for any n.
    """
    ns = np.asarray(ns, dtype=float)
    lam = complex(coeffs["lam"])
    inv2 = np.exp(-2 * ns * np.log(lam))  # lam^(-2n)
    if pair.intersection == 1:
        (a, _), (_, d) = coeffs["eta"]
        t = a + d * inv2
        return _top_root(t, inv2)
    (a, b), (c, d) = coeffs["sigma"]
    (a2, b2), (c2, d2) = coeffs["nu"]
    t = b * c2 + (a * a2 + d * d2) * inv2 + c * b2 * inv2 * inv2
    return _top_root(t, inv2 * inv2)


def leading_coefficient(coeffs: dict, pair: CurvePair) -> complex:
    if pair.intersection == 1:
        return complex(coeffs["eta"][0, 0])
    return complex(coeffs["sigma"][0, 1] * coeffs["nu"][1, 0])


def twist_slope(rep, pair: CurvePair, n_max: int = 50, split: int | None = None) -> TwistSlope:
    """Affine growth of l(T^n eta) in n, with the eigenvalue asymptotics.

    The fitted slope should approach i l(gamma). Decay constants are fitted on
    n <= split and then checked on the remaining n, with a roundoff floor.
    """
    if n_max < 5:
        raise InvalidInput("need at least 5 twist counts")
    coeffs = pair_coefficients(rep, pair)  # raises unless gamma is loxodromic
    coef = leading_coefficient(coeffs, pair)
    if abs(coef) < COEFFICIENT_FLOOR:
        raise DegenerateConfiguration(f"leading coefficient {abs(coef):.3e} vanishes")
    lam = complex(coeffs["lam"])
    ell_gamma = 2 * math.log(abs(lam))
    i = pair.intersection

    ns = np.arange(1, n_max + 1)
    lengths = np.array([rep_length(rep, twist_word(pair, int(n))) for n in ns])
    design = np.stack([ns, np.ones_like(ns)], 1).astype(float)
    (slope, intercept), *_ = np.linalg.lstsq(design, lengths, rcond=None)
    residuals = lengths - (slope * ns + intercept)

    mu = normalized_top_eigenvalue(coeffs, pair, ns)
    defects = np.abs(mu - coef)
    decay = np.abs(lam) ** (-2.0 * ns)
    asym = lengths - (i * ell_gamma * ns + 2 * math.log(abs(coef)))

    split = max(2, n_max // 4) if split is None else int(split)
    early = ns <= split
    late = ~early
    eps = np.finfo(float).eps
    floor_d = np.full(len(ns), 64 * eps * abs(coef))
    floor_r = 64 * eps * (1 + np.abs(lengths))

    def fit_constant(values, floor):
        # only points well above roundoff say anything about the decay rate
        usable = early & (values > 1e3 * floor)
        if not usable.any():
            usable = ns == ns[0]
        return float(np.max(values[usable] / decay[usable]))

    k_defect = fit_constant(defects, floor_d)
    k_resid = fit_constant(np.abs(asym), floor_r)
    holds = bool(np.all(defects[late] <= 1.01 * k_defect * decay[late] + floor_d[late])
                 and np.all(np.abs(asym[late]) <= 1.01 * k_resid * decay[late] + floor_r[late]))
    return TwistSlope(ns, lengths, float(slope), float(intercept), residuals, ell_gamma, i,
                      coef, lam, defects, k_defect, asym, k_resid, holds)
