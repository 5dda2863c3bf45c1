"""Dirichlet energy formulas and bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput


def energy_density_flat(gx, gy):
    """Half the squared norm of the differential in a flat orthonormal frame."""
    gx, gy = np.asarray(gx, dtype=float), np.asarray(gy, dtype=float)
    out = 0.5 * (gx * gx + gy * gy)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TwistedMapParams:
    """Collar [0, M] x R/Z twisted n times across its middle [eps, M - eps]."""

    n: int
    modulus: float
    inset: float
    length: float
    constant: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInput("twist count must be >= 0")
        if not (self.modulus > 0 and self.length > 0 and self.constant >= 0):
            raise InvalidInput("modulus, length must be positive and constant >= 0")
        if not 0 < self.inset < self.modulus / 2:
            raise InvalidInput("inset must lie in (0, M/2)")

    @property
    def width(self) -> float:
        return self.modulus - 2 * self.inset


def kn_collar_energy(p: TwistedMapParams) -> float:
    """Energy of the twisted map on the middle of the collar."""
    w = p.width
    return 0.5 * ((p.n / w) ** 2 + 1.0) * w * p.length ** 2


def kn_total_energy(p: TwistedMapParams) -> float:
    """Collar energy plus the fixed energy spent off the collar."""
    return kn_collar_energy(p) + p.constant


def kn_map_height(p: TwistedMapParams, x, y):
    """Arclength parameter along the target geodesic of the point (x, y).

    The target closed geodesic has length p.length; on the twisting strip
    the map is y + n (x - eps) / (M - 2 eps) measured in turns.
    """
    x = np.clip(np.asarray(x, dtype=float), p.inset, p.modulus - p.inset)
    return p.length * (np.asarray(y, dtype=float) + p.n * (x - p.inset) / p.width)


def minsky_lower_bound(image_length: float, extremal_length: float) -> float:
    if not extremal_length > 0:
        raise InvalidInput("extremal length must be positive")
    return 0.5 * image_length ** 2 / extremal_length


def area_lower_bound(genus: int) -> float:
    """Area of a closed hyperbolic surface of the given genus."""
    if genus < 2:
        raise InvalidInput("genus must be >= 2")
    return 4 * math.pi * (genus - 1)


def area_equality(energy: float, genus: int, rel_tol: float) -> bool:
    """True when energy equals the area bound up to rel_tol."""
    area = area_lower_bound(genus)
    return abs(energy - area) <= rel_tol * area


def bilipschitz_energy_interval(e_ref: float, c: float) -> tuple[float, float]:
    if c < 1:
        raise InvalidInput("comparison constant must be >= 1")
    if e_ref < 0:
        raise InvalidInput("reference energy must be nonnegative")
    return e_ref / c, e_ref * c
