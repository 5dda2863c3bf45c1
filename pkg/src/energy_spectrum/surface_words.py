"""Words in the genus-g surface group and their images under representations.

Generators are numbered 1..2g with a_i = 2i-1 and b_i = 2i; the relator is
a1 b1 a1^-1 b1^-1 ... ag bg ag^-1 bg^-1. Words are run-length encoded as
(generator, exponent) syllables and kept freely reduced.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .hypgeo import MoebiusMap, log_abs_eigenvalue

_LETTER = re.compile(r"^([ab])(\d+)(?:\^(-?\d+))?$")


def _reduce(syllables):
    stack: list[list[int]] = []
    for gen, exp in syllables:
        if exp == 0:
            continue
        if stack and stack[-1][0] == gen:
            stack[-1][1] += exp
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([gen, exp])
    return tuple((g, e) for g, e in stack)


@dataclass(frozen=True)
class Word:
    syllables: tuple
    genus: int = 2

    def __post_init__(self):
        if self.genus < 2:
            raise InvalidInput("genus must be at least 2")
        syl = []
        for gen, exp in self.syllables:
            gen, exp = int(gen), int(exp)
            if not 1 <= gen <= 2 * self.genus:
                raise InvalidInput(f"generator {gen} outside 1..{2 * self.genus}")
            syl.append((gen, exp))
        object.__setattr__(self, "syllables", _reduce(syl))

    @classmethod
    def parse(cls, text: str, genus: int = 2) -> "Word":
        syl = []
        for tok in text.split():
            m = _LETTER.match(tok)
            if not m:
                raise InvalidInput(f"bad word token {tok!r}")
            kind, idx, exp = m.group(1), int(m.group(2)), int(m.group(3) or 1)
            if idx < 1:
                raise InvalidInput(f"bad generator index in {tok!r}")
            syl.append((2 * idx - 1 if kind == "a" else 2 * idx, exp))
        return cls(tuple(syl), genus)

    @classmethod
    def empty(cls, genus: int = 2) -> "Word":
        return cls((), genus)

    @classmethod
    def generator(cls, gen: int, genus: int = 2) -> "Word":
        return cls(((gen, 1),), genus)

    def __str__(self):
        out = []
        for gen, exp in self.syllables:
            name = f"{'a' if gen % 2 else 'b'}{(gen + 1) // 2}"
            out.append(name if exp == 1 else f"{name}^{exp}")
        return " ".join(out)

    def __mul__(self, other: "Word") -> "Word":
        if self.genus != other.genus:
            raise InvalidInput("words from different genera")
        return Word(self.syllables + other.syllables, self.genus)

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        return Word(base.syllables * abs(n), self.genus)

    def inverse(self) -> "Word":
        return Word(tuple((g, -e) for g, e in reversed(self.syllables)), self.genus)

    def __len__(self):
        return sum(abs(e) for _, e in self.syllables)

    @property
    def is_empty(self) -> bool:
        return not self.syllables


def reduce(w: Word) -> Word:
    # construction already reduces; kept as an explicit operation
    return Word(w.syllables, w.genus)


def relator_word(genus: int) -> Word:
    syl = []
    for i in range(genus):
        a, b = 2 * i + 1, 2 * i + 2
        syl += [(a, 1), (b, 1), (a, -1), (b, -1)]
    return Word(tuple(syl), genus)


@dataclass(frozen=True)
class CurvePair:
    """Two curves with declared intersection number 1 or 2.

    For intersection 2 the twisted word is sigma gamma^-n nu gamma^n, where
    sigma nu = eta splits eta at its two crossings with gamma.
    """

    gamma: Word
    eta: Word
    intersection: int
    sigma: Word | None = None
    nu: Word | None = None

    def __post_init__(self):
        if self.intersection not in (1, 2):
            raise InvalidInput("intersection must be 1 or 2")
        if self.gamma.is_empty:
            raise InvalidInput("gamma must be nontrivial")
        if self.intersection == 2:
            if self.sigma is None or self.nu is None:
                raise InvalidInput("intersection-2 pairs need sigma and nu")
            if self.sigma * self.nu != self.eta:
                raise InvalidInput(f"sigma nu = {self.sigma * self.nu} does not reduce to eta = {self.eta}")

    @classmethod
    def from_strings(cls, gamma, eta, intersection, sigma=None, nu=None, genus=2):
        p = lambda s: None if s is None else Word.parse(s, genus)
        return cls(p(gamma), p(eta), int(intersection), p(sigma), p(nu))

    def to_json(self):
        out = {"gamma": str(self.gamma), "eta": str(self.eta), "intersection": self.intersection}
        if self.intersection == 2:
            out.update(sigma=str(self.sigma), nu=str(self.nu))
        return out


def twist_word(pair: CurvePair, n: int) -> Word:
    """Word of the n-fold twist of eta about gamma, n >= 0."""
    if n < 0:
        raise InvalidInput("twist count must be nonnegative")
    g = pair.gamma
    if pair.intersection == 1:
        return pair.eta * g ** n
    return pair.sigma * g ** (-n) * pair.nu * g ** n


# ---------------------------------------------------------------------------
# automorphisms (Dehn twists acting on generators)


def substitute(w: Word, images: dict) -> Word:
    """Image of w under the endomorphism sending generator g to images[g]."""
    out = Word.empty(w.genus)
    for gen, exp in w.syllables:
        img = images.get(gen, Word.generator(gen, w.genus))
        out = out * img ** exp
    return out


def twist_automorphism(pair: CurvePair) -> dict:
    """Generator images of the Dehn twist about gamma, for standard pairs.

    Supported: gamma = a_k, eta = b_k (b_k -> b_k a_k) and gamma = b_k,
    eta = a_k (a_k -> a_k b_k^-1). Both fix the relator word exactly.
    """
    gs, es = pair.gamma.syllables, pair.eta.syllables
    if (pair.intersection != 1 or len(gs) != 1 or len(es) != 1
            or gs[0][1] != 1 or es[0][1] != 1):
        raise InvalidInput("twist automorphism only for single-letter a_k/b_k pairs")
    g, e = gs[0][0], es[0][0]
    genus = pair.gamma.genus
    if g % 2 == 1 and e == g + 1:
        return {e: Word(((e, 1), (g, 1)), genus)}
    if g % 2 == 0 and e == g - 1:
        return {e: Word(((e, 1), (g, -1)), genus)}
    raise InvalidInput("gamma and eta must be the two generators of one handle")


def iterate_automorphism(w: Word, images: dict, n: int) -> Word:
    for _ in range(n):
        w = substitute(w, images)
    return w


# ---------------------------------------------------------------------------
# evaluation


def _scaled_power(mat, exp):
    """mat^exp as (matrix, log factor) with entries kept near unit size."""
    result = np.eye(2, dtype=complex)
    log_s = 0.0
    base = mat if exp >= 0 else np.array([[mat[1, 1], -mat[0, 1]], [-mat[1, 0], mat[0, 0]]])
    base_log = 0.0
    k = abs(exp)
    while k:
        if k & 1:
            result = result @ base
            log_s += base_log
            s = np.max(np.abs(result))
            result /= s
            log_s += math.log(s)
        k >>= 1
        if k:
            base = base @ base
            base_log *= 2
            s = np.max(np.abs(base))
            base /= s
            base_log += math.log(s)
    return result, log_s


def evaluate_scaled(rep, w: Word):
    """rho(w) as (matrix, log factor): rho(w) = exp(log factor) * matrix."""
    if w.genus != rep.genus:
        raise InvalidInput("word and representation have different genus")
    mat = np.eye(2, dtype=complex)
    log_s = 0.0
    for gen, exp in w.syllables:
        p, lp = _scaled_power(rep.generators[gen - 1].matrix, exp)
        mat = mat @ p
        s = np.max(np.abs(mat))
        mat /= s
        log_s += lp + math.log(s)
    return mat, log_s


def evaluate(rep, w: Word) -> MoebiusMap:
    mat, log_s = evaluate_scaled(rep, w)
    if log_s > 300:
        raise InvalidInput("word image overflows double precision; use rep_length")
    return MoebiusMap.from_unimodular(mat * math.exp(log_s))


def rep_length(rep, w: Word) -> float:
    """Translation length of rho(w), computed in the log domain."""
    mat, log_s = evaluate_scaled(rep, w)
    return 2.0 * log_abs_eigenvalue(mat[0, 0] + mat[1, 1], log_s)


def verify_relator(rep, genus: int | None = None) -> float:
    """Distance of the relator image from +-I in operator norm."""
    g = rep.genus if genus is None else genus
    if g != rep.genus:
        raise InvalidInput("genus mismatch")
    r = np.eye(2, dtype=complex)
    for i in range(g):
        a = rep.generators[2 * i].matrix
        b = rep.generators[2 * i + 1].matrix
        r = r @ a @ b @ np.linalg.inv(a) @ np.linalg.inv(b)
    eye = np.eye(2)
    return float(min(np.linalg.norm(r - eye, 2), np.linalg.norm(r + eye, 2)))
