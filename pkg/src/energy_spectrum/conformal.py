"""Extremal lengths on flat cylinders, flat tori and slit-glued square surfaces."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .hypgeo import CheckResult

TOL = 1e-9


@dataclass(frozen=True)
class FlatCylinder:
    circumference: float
    height: float

    def __post_init__(self):
        if not (self.circumference > 0 and self.height > 0):
            raise InvalidInput("cylinder sides must be positive")

    @property
    def modulus(self) -> float:
        return self.height / self.circumference


@dataclass(frozen=True)
class FlatTorus:
    tau: complex

    def __post_init__(self):
        tau = complex(self.tau)
        if not tau.imag > 0:
            raise InvalidInput("torus modulus needs Im tau > 0")
        object.__setattr__(self, "tau", tau)


def extremal_length_from_modulus(modulus: float) -> float:
    if not modulus > 0:
        raise InvalidInput("modulus must be positive")
    return 1.0 / modulus


def torus_extremal_length(tau, pq) -> float:
    """Extremal length of the primitive class p + q tau on C / (Z + tau Z)."""
    tau = FlatTorus(tau).tau
    p, q = (int(v) for v in pq)
    if math.gcd(p, q) != 1:
        raise InvalidInput(f"class {(p, q)} is not primitive")
    return abs(p + q * tau) ** 2 / tau.imag


def torus_intersection(pq, rs) -> int:
    return abs(int(pq[0]) * int(rs[1]) - int(pq[1]) * int(rs[0]))


def collar_check(e_gamma: float, e_eta: float, intersection: int, tol: float = TOL) -> CheckResult:
    """E(gamma) E(eta) >= i^2."""
    margin = e_gamma * e_eta - intersection ** 2
    return CheckResult(margin >= -tol, margin)


# ---------------------------------------------------------------------------
# X_k families


@dataclass(frozen=True)
class ExtremalBounds:
    gamma_upper: float
    gamma_lower: float
    eta_upper: float
    product_upper: float
    eps_achieved: float
    intersection: int


@dataclass(frozen=True)
class GluedSquareParams:
    """Two unit-square tori with a slit of length delta, glued along the slits."""

    delta: float
    genus_left: int = 1
    genus_right: int = 1

    def __post_init__(self):
        if not 0 < self.delta < 0.25:
            raise InvalidInput("slit length must lie in (0, 1/4)")
        if self.genus_left < 1 or self.genus_right < 1:
            raise InvalidInput("glued pieces need genus >= 1")


def glued_square_bounds(params: GluedSquareParams) -> ExtremalBounds:
    """Annulus bounds for the separating curve gamma and a crossing curve eta (i = 2)."""
    d = params.delta
    if d >= 0.25:
        raise InvalidInput("slit length must be below 1/4")
    g_up = 1.0 / (1.0 - 2.0 * d)
    e_up = 1.0 / (0.25 - d)
    g_low = 4.0 / e_up  # the collar inequality with i = 2
    prod = g_up * e_up
    eps = max(prod - 4.0, 1.0 - g_low, g_up - 1.0)
    return ExtremalBounds(g_up, g_low, e_up, prod, eps, 2)


@dataclass(frozen=True)
class SlitTorusParams:
    """Non-separating model: a square torus perturbed by a single slit.

    The slit's effect on both extremal lengths is a multiplicative slack.
    """

    slack: float

    def __post_init__(self):
        if not self.slack >= 0:
            raise InvalidInput("slack must be nonnegative")


def slit_torus_bounds(params: SlitTorusParams) -> ExtremalBounds:
    s = params.slack
    up = 1.0 + s
    low = 1.0 / up
    prod = up * up
    eps = max(prod - 1.0, 1.0 - low, up - 1.0)
    return ExtremalBounds(up, low, up, prod, eps, 1)


@dataclass(frozen=True)
class XkModel:
    k: int
    separating: bool
    params: object
    bounds: ExtremalBounds


def xk_family(separating: bool, k: int, slack: float | None = None) -> XkModel:
    """Surface parameters whose certified gap eps_achieved is at most 1/k."""
    if k < 1:
        raise InvalidInput("k must be >= 1")
    target = 1.0 / k
    if separating:
        lo, hi = 0.0, 0.25
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if glued_square_bounds(GluedSquareParams(mid)).eps_achieved <= target:
                lo = mid
            else:
                hi = mid
        params = GluedSquareParams(lo)
        return XkModel(k, True, params, glued_square_bounds(params))
    if slack is None:
        slack = math.sqrt(1.0 + target) - 1.0
    params = SlitTorusParams(slack)
    bounds = slit_torus_bounds(params)
    if bounds.eps_achieved > target * (1 + 1e-12):
        raise InvalidInput(f"slack {slack} gives eps {bounds.eps_achieved:.3g} > 1/k")
    return XkModel(k, False, params, bounds)


# ---------------------------------------------------------------------------
# hyperbolic surfaces


def hyperbolic_extremal_bounds(length: float, area: float) -> tuple[float, float]:
    """Two-sided extremal-length bounds for a simple closed geodesic.

    Lower: the hyperbolic metric itself, length^2 / area. Upper: the
    embedded standard collar of half-width w, sinh w sinh(length/2) = 1,
    is an annulus of modulus 2 arctan(sinh w) / length.
    """
    if not (length > 0 and area > 0):
        raise InvalidInput("length and area must be positive")
    half_angle = np.arctan(1.0 / np.sinh(length / 2))
    return length ** 2 / area, length / (2 * half_angle)
