"""Concrete surface-group representations.

The genus-2 group comes from the regular octagon with interior angles pi/4.
Its eight sides are geodesic arcs in the Poincare disc, side k centred at
angle k pi/4. Generators pair sides two steps apart: a1 sends side 2 to side 0,
b1 sends 1 to 3, a2 sends 6 to 4, b2 sends 5 to 7. With this pairing the
product a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1 is the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, InvalidInput
from .hypgeo import MoebiusMap, classify, diagonalizing_conjugator
from .surface_words import CurvePair, Word, evaluate, verify_relator

RELATOR_TOL = 1e-8

# generator index -> (source side, target side)
SIDE_PAIRINGS = {1: (2, 0), 2: (1, 3), 3: (6, 4), 4: (5, 7)}

# translation length of every octagon generator, 2 arccosh(1 + 1/sqrt 2)
OCTAGON_GENERATOR_LENGTH = 2.2567679299326

# disc -> upper half-plane, z = i (1 + w) / (1 - w)
CAYLEY = np.array([[1j, 1j], [-1, 1]]) / np.sqrt(2j)


@dataclass(frozen=True)
class GroupRep:
    genus: int
    generators: tuple
    field: str = "real"
    checked: bool = True

    def __post_init__(self):
        gens = tuple(self.generators)
        if len(gens) != 2 * self.genus:
            raise InvalidInput(f"need {2 * self.genus} generators, got {len(gens)}")
        if not all(isinstance(g, MoebiusMap) for g in gens):
            raise InvalidInput("generators must be MoebiusMaps")
        if self.field not in ("real", "complex"):
            raise InvalidInput("field must be 'real' or 'complex'")
        if self.field == "real" and not all(g.is_real for g in gens):
            raise InvalidInput("real representation with complex entries")
        object.__setattr__(self, "generators", gens)
        if self.checked:
            res = verify_relator(self)
            if res > RELATOR_TOL:
                raise ConstructionError(f"relator residual {res:.3e} exceeds {RELATOR_TOL}")

    @classmethod
    def from_matrices(cls, genus, mats, field=None, checked=True) -> "GroupRep":
        gens = tuple(MoebiusMap.from_matrix(m) for m in mats)
        if field is None:
            field = "real" if all(g.is_real for g in gens) else "complex"
        return cls(genus, gens, field, checked)

    def conjugated(self, g: MoebiusMap) -> "GroupRep":
        """Representation w -> g rho(w) g^-1."""
        gens = tuple(m.conjugate_by(g) for m in self.generators)
        field = "real" if self.field == "real" and all(m.is_real for m in gens) else "complex"
        return GroupRep(self.genus, gens, field, self.checked)

    def to_json(self):
        return {"genus": self.genus, "field": self.field,
                "generators": [g.to_json() for g in self.generators]}

    @classmethod
    def from_json(cls, data, checked=True) -> "GroupRep":
        try:
            genus = int(data["genus"])
            mats = [MoebiusMap.from_json(m) for m in data["generators"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"bad representation record: {exc}") from exc
        field = data.get("field")
        if field is None:
            field = "real" if all(m.is_real for m in mats) else "complex"
        return cls(genus, tuple(mats), field, checked)


# ---------------------------------------------------------------------------
# the regular octagon


@dataclass(frozen=True)
class OctagonGeometry:
    """Disc-model data of the regular octagon with interior angles pi/4."""

    side_center_radius: float  # |centre| of the circle carrying each side
    side_circle_radius: float
    corner_radius: float  # Euclidean |corner| in the disc
    midpoint_radius: float  # Euclidean |side midpoint| in the disc

    def side_center(self, k):
        return self.side_center_radius * np.exp(1j * k * np.pi / 4)

    def corner(self, k):
        """Corner between sides k and k+1."""
        return self.corner_radius * np.exp(1j * (k * np.pi / 4 + np.pi / 8))


def octagon_geometry() -> OctagonGeometry:
    m = math.sqrt(math.sqrt(2) / (2 + math.sqrt(2)))
    center = (1 + m * m) / (2 * m)
    big_r = math.acosh((1 + math.sqrt(2)) ** 2)
    return OctagonGeometry(center, center - m, math.tanh(big_r / 2), m)


def _rot(theta):
    return np.array([[np.exp(0.5j * theta), 0], [0, np.exp(-0.5j * theta)]])


def disc_side_pairing(source: int, target: int) -> np.ndarray:
    """SU(1,1) matrix taking side `source` onto side `target`."""
    r = math.acosh(1 + math.sqrt(2))
    trans = np.array([[math.cosh(r), math.sinh(r)], [math.sinh(r), math.cosh(r)]], dtype=complex)
    return _rot(target * np.pi / 4) @ trans @ _rot((4 - source) * np.pi / 4)


def disc_to_upper(w):
    w = np.asarray(w, dtype=complex)
    return 1j * (1 + w) / (1 - w)


def genus2_octagon_rep() -> GroupRep:
    gens = []
    cinv = np.linalg.inv(CAYLEY)
    for gen in sorted(SIDE_PAIRINGS):
        m = CAYLEY @ disc_side_pairing(*SIDE_PAIRINGS[gen]) @ cinv
        gens.append(MoebiusMap.from_matrix(m.real))
    return GroupRep(2, tuple(gens), "real")


def octagon_curve_pairs(genus: int = 2) -> dict:
    """Default pairs on the octagon surface.

    i = 1: gamma = a1, eta = b1.
    i = 2: gamma = [a1, b1] (separating), eta = b1 b2 split as sigma = b1,
    nu = b2; twisting about gamma conjugates the second handle.
    """
    return {
        1: CurvePair.from_strings("a1", "b1", 1, genus=genus),
        2: CurvePair.from_strings("a1 b1 a1^-1 b1^-1", "b1 b2", 2, "b1", "b2", genus=genus),
    }


# ---------------------------------------------------------------------------
# perturbations


def _expm_traceless(x):
    q = x[0, 0] ** 2 + x[0, 1] * x[1, 0]  # x^2 = q I
    s = np.sqrt(q)
    sinhc = np.sinh(s) / s if abs(s) > 1e-8 else 1 + q / 6
    return np.cosh(s) * np.eye(2) + sinhc * x


def _sl2(p):
    return np.array([[p[0], p[1]], [p[2], -p[0]]], dtype=complex)


def _relator(mats):
    r = np.eye(2, dtype=complex)
    for i in range(0, len(mats), 2):
        a, b = mats[i], mats[i + 1]
        r = r @ a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)
    return r


def perturb_rep(rep: GroupRep, eps: float, seed: int = 0, max_iter: int = 50) -> GroupRep:
    """Complex perturbation of every generator, relator restored on the last handle.

    Each entry moves by complex noise of modulus <= eps, then the last
    handle (a_g, b_g) is corrected by right factors exp(X), exp(Y) with X, Y
    traceless, found by minimum-norm Gauss-Newton on the relator.
    """
    if eps < 0:
        raise InvalidInput("eps must be nonnegative")
    if eps == 0:
        return GroupRep(rep.genus, rep.generators, rep.field, rep.checked)
    rng = np.random.default_rng(seed)
    mats = []
    for g in rep.generators:
        rad = eps * np.sqrt(rng.random((2, 2)))
        noise = rad * np.exp(2j * np.pi * rng.random((2, 2)))
        m = g.matrix + noise
        mats.append(m / np.sqrt(np.linalg.det(m)))
    r0 = _relator([g.matrix for g in rep.generators])
    sign = 1.0 if np.linalg.norm(r0 - np.eye(2)) <= np.linalg.norm(r0 + np.eye(2)) else -1.0
    a0, b0 = mats[-2], mats[-1]

    def residual(z):
        trial = mats[:-2] + [a0 @ _expm_traceless(_sl2(z[:3])), b0 @ _expm_traceless(_sl2(z[3:]))]
        return (_relator(trial) - sign * np.eye(2)).ravel(), trial

    z = np.zeros(6, dtype=complex)
    h = 1e-6
    for _ in range(max_iter):
        f, trial = residual(z)
        if np.linalg.norm(f) <= 1e-14:
            break
        jac = np.empty((4, 6), dtype=complex)
        for j in range(6):
            e = np.zeros(6)
            e[j] = h
            jac[:, j] = (residual(z + e)[0] - residual(z - e)[0]) / (2 * h)
        sv = np.linalg.svd(jac, compute_uv=False)
        if sv[2] < 1e-10 * sv[0]:
            raise ConstructionError("relator re-solve is singular")
        # the relator is unimodular, so one singular value is zero
        z = z + np.linalg.lstsq(jac, -f, rcond=1e-8)[0]
    f, trial = residual(z)
    if np.linalg.norm(f) > 1e-10:
        raise ConstructionError(f"relator re-solve did not converge (residual {np.linalg.norm(f):.2e})")
    return GroupRep.from_matrices(rep.genus, trial, field="complex")


def jorgensen_check(a: MoebiusMap, b: MoebiusMap) -> float:
    """|tr^2 A - 4| + |tr [A, B] - 2|; below 1 signals a likely non-discrete pair."""
    comm = a @ b @ a.inverse() @ b.inverse()
    return abs(a.trace ** 2 - 4) + abs(comm.trace - 2)


def jorgensen_report(rep: GroupRep) -> dict:
    gens = rep.generators
    return {(i + 1, j + 1): jorgensen_check(gens[i], gens[j])
            for i in range(len(gens)) for j in range(len(gens)) if i != j}


def diagonalize(rep: GroupRep, gamma: Word):
    """(conjugated rep, conjugator g) with g rho(gamma) g^-1 diagonal, |lam| > 1."""
    g = diagonalizing_conjugator(evaluate(rep, gamma))
    return rep.conjugated(g), g


def pair_coefficients(rep: GroupRep, pair: CurvePair) -> dict:
    """Entries of rho(sigma), rho(nu) (or rho(eta)) once rho(gamma) is diagonal."""
    conj, _ = diagonalize(rep, pair.gamma)
    lam = evaluate(conj, pair.gamma).a
    if pair.intersection == 1:
        m = evaluate(conj, pair.eta).matrix
        return {"lam": lam, "eta": m}
    return {"lam": lam, "sigma": evaluate(conj, pair.sigma).matrix, "nu": evaluate(conj, pair.nu).matrix}


def nonvanishing_coefficients(rep: GroupRep, pair: CurvePair, floor: float = 1e-6) -> bool:
    co = pair_coefficients(rep, pair)
    mats = [co["eta"]] if pair.intersection == 1 else [co["sigma"], co["nu"]]
    return bool(all(np.all(np.abs(m) > floor) for m in mats))


def generator_classes(rep: GroupRep) -> list:
    return [classify(g) for g in rep.generators]
