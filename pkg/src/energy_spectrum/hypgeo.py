"""Hyperbolic plane and space: Moebius maps, points, distances, thin-triangle checks.

Points of H^2 live in the upper half-plane, points of H^3 in the upper
half-space. Internally many computations go through the hyperboloid model
in R^{3,1}, where SL(2,C) acts linearly on Hermitian 2x2 matrices.
H^2 sits inside H^3 as the vertical half-plane over the real axis, so real
matrices act on both compatibly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, PreconditionError

TOL = 1e-9
OVERFLOW_LOG = math.log(1e300)

# Lorentz form of signature (-, +, +, +)
METRIC = np.array([-1.0, 1.0, 1.0, 1.0])


# ---------------------------------------------------------------------------
# Moebius maps


@dataclass(frozen=True)
class MoebiusMap:
    """Element of SL(2,C), determined up to sign as an isometry."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        vals = [complex(v) for v in (self.a, self.b, self.c, self.d)]
        if not all(np.isfinite(v.real) and np.isfinite(v.imag) for v in vals):
            raise InvalidInput("non-finite matrix entry")
        for name, v in zip("abcd", vals):
            object.__setattr__(self, name, v)
        det = vals[0] * vals[3] - vals[1] * vals[2]
        if abs(det - 1) > TOL * max(1.0, max(abs(v) for v in vals) ** 2):
            raise InvalidInput(f"determinant {det} is not 1; use MoebiusMap.from_matrix")

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        """Normalize any invertible 2x2 matrix to determinant one."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise InvalidInput("expected a finite 2x2 matrix")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if det == 0:
            raise InvalidInput("singular matrix")
        m = m / np.sqrt(det)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def diagonal(cls, lam) -> "MoebiusMap":
        lam = complex(lam)
        return cls(lam, 0, 0, 1 / lam)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def is_real(self) -> bool:
        return all(abs(v.imag) <= TOL for v in (self.a, self.b, self.c, self.d))

    @classmethod
    def from_unimodular(cls, m) -> "MoebiusMap":
        # products of unimodular matrices are unimodular; recomputing the
        # determinant of large entries would only add cancellation error
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap.from_unimodular(self.matrix @ other.matrix)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def power(self, n: int) -> "MoebiusMap":
        base = self if n >= 0 else self.inverse()
        return MoebiusMap.from_unimodular(np.linalg.matrix_power(base.matrix, abs(int(n))))

    def conjugate_by(self, g: "MoebiusMap") -> "MoebiusMap":
        """g m g^-1."""
        return g @ self @ g.inverse()

    def eigenvalues(self) -> tuple[complex, complex]:
        """(lam, 1/lam) with |lam| >= 1."""
        lam = larger_eigenvalue(self.trace)
        return lam, 1 / lam

    def distance_to(self, other: "MoebiusMap") -> float:
        """Operator-norm distance in PSL(2,C), minimized over the sign."""
        m, o = self.matrix, other.matrix
        return min(np.linalg.norm(m - o, 2), np.linalg.norm(m + o, 2))

    def to_json(self):
        return [[v.real, v.imag] for v in (self.a, self.b, self.c, self.d)]

    @classmethod
    def from_json(cls, entries) -> "MoebiusMap":
        if len(entries) != 4:
            raise InvalidInput("a matrix needs four [re, im] entries")
        vals = [complex(float(re), float(im)) for re, im in entries]
        return cls.from_matrix(np.array(vals).reshape(2, 2))


def larger_eigenvalue(trace: complex) -> complex:
    """Root of x^2 - tr x + 1 with modulus >= 1, avoiding cancellation."""
    tr = complex(trace)
    disc = np.sqrt(tr * tr - 4)
    # pick the sign that adds magnitudes
    s = tr + disc if abs(tr + disc) >= abs(tr - disc) else tr - disc
    return s / 2


def log_abs_eigenvalue(trace: complex, log_scale: float = 0.0) -> float:
    """log|lam| for a matrix whose trace is trace * exp(log_scale).

    Works for traces far beyond double range, which is how long words are
    evaluated (scaled products keep a separate log factor).
    """
    tr = complex(trace)
    if tr == 0:
        return 0.0 if log_scale <= 0 else _log_abs_eig_big(tr, log_scale)
    log_abs_tr = math.log(abs(tr)) + log_scale
    if log_abs_tr < 30.0:
        t = tr * math.exp(log_scale)
        return math.log(abs(larger_eigenvalue(t)))
    return _log_abs_eig_big(tr, log_scale)


def _log_abs_eig_big(tr, log_scale):
    # lam = T/2 * (1 + sqrt(1 - 4/T^2)), 4/T^2 tiny
    inv_sq = 4.0 / (tr * tr) * math.exp(-2.0 * log_scale)
    root = np.sqrt(1 - inv_sq)
    if root.real < 0:
        root = -root
    return math.log(abs(tr)) + log_scale - math.log(2.0) + math.log(abs(1 + root))


def classify(m: MoebiusMap, tol: float = TOL) -> str:
    tr = m.trace
    if abs(tr.imag) <= tol and abs(abs(tr.real) - 2) <= tol:
        # only trace +-2 can be the identity; skip the norm otherwise
        return "identity" if m.distance_to(MoebiusMap.identity()) <= tol else "parabolic"
    if abs(tr.imag) <= tol and abs(tr.real) < 2:
        return "elliptic"
    return "loxodromic"


def translation_length(m: MoebiusMap, tol: float = TOL) -> float:
    """2 log|lam|; zero for identity, parabolic and elliptic maps."""
    if classify(m, tol) != "loxodromic":
        return 0.0
    return 2.0 * log_abs_eigenvalue(m.trace)


def power_translation_length(m: MoebiusMap, n: int) -> float:
    """Translation length of m^n computed from log|lam|, no overflow."""
    if classify(m) != "loxodromic":
        return 0.0
    return 2.0 * abs(n) * log_abs_eigenvalue(m.trace)


def diagonalizing_conjugator(m: MoebiusMap) -> MoebiusMap:
    """g with g m g^-1 = diag(lam, 1/lam), |lam| > 1."""
    if classify(m) != "loxodromic":
        raise PreconditionError("only loxodromic maps are diagonalized here")
    lam, mu = m.eigenvalues()
    mat = m.matrix
    vecs = []
    for ev in (lam, mu):
        # kernel of m - ev I, pick the better conditioned row
        r0 = np.array([mat[0, 1], ev - mat[0, 0]])
        r1 = np.array([ev - mat[1, 1], mat[1, 0]])
        v = r0 if np.linalg.norm(r0) >= np.linalg.norm(r1) else r1
        vecs.append(v / np.linalg.norm(v))
    p = np.column_stack(vecs)  # m = p diag p^-1
    return MoebiusMap.from_matrix(np.linalg.inv(p))


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class H2Point:
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)) or z.imag <= 0:
            raise InvalidInput(f"H2 point needs Im z > 0, got {z}")
        object.__setattr__(self, "z", z)

    def lift(self) -> "H3Point":
        return H3Point(complex(self.z.real, 0.0), self.z.imag)


@dataclass(frozen=True)
class H3Point:
    z: complex
    t: float

    def __post_init__(self):
        z, t = complex(self.z), float(self.t)
        if not (np.isfinite(z.real) and np.isfinite(z.imag) and np.isfinite(t)) or t <= 0:
            raise InvalidInput(f"H3 point needs finite z and t > 0, got {(z, t)}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", t)


def _as_h3(p) -> H3Point:
    if isinstance(p, H3Point):
        return p
    if isinstance(p, H2Point):
        return p.lift()
    raise InvalidInput(f"not a hyperbolic point: {p!r}")


def dist(p, q) -> float:
    if isinstance(p, H2Point) and isinstance(q, H2Point):
        s = abs(p.z - q.z) / (2.0 * math.sqrt(p.z.imag * q.z.imag))
        return 2.0 * math.asinh(s)
    p, q = _as_h3(p), _as_h3(q)
    num = math.hypot(abs(p.z - q.z), p.t - q.t)
    return 2.0 * math.asinh(num / (2.0 * math.sqrt(p.t * q.t)))


def apply(m: MoebiusMap, p):
    """Act by m; H2 points need a real map and stay in H2."""
    if isinstance(p, H2Point):
        if not m.is_real:
            return apply(m, p.lift())
        a, b, c, d = (v.real for v in (m.a, m.b, m.c, m.d))
        return H2Point((a * p.z + b) / (c * p.z + d))
    p = _as_h3(p)
    a, b, c, d = m.a, m.b, m.c, m.d
    w = c * p.z + d
    den = abs(w) ** 2 + abs(c) ** 2 * p.t ** 2
    z = ((a * p.z + b) * w.conjugate() + a * c.conjugate() * p.t ** 2) / den
    return H3Point(z, p.t / den)


def angle_at(vertex, p, q) -> float:
    """Angle at vertex between the geodesics to p and to q."""
    x = to_hyperboloid(vertex)
    u = log_map(x, to_hyperboloid(p))
    v = log_map(x, to_hyperboloid(q))
    nu, nv = np.sqrt(ldot(u, u)), np.sqrt(ldot(v, v))
    if nu == 0 or nv == 0:
        raise PreconditionError("angle undefined at a coincident point")
    return float(np.arccos(np.clip(ldot(u, v) / (nu * nv), -1.0, 1.0)))


# ---------------------------------------------------------------------------
# hyperboloid model, vectorized over leading axes


def ldot(x, y):
    return np.sum(METRIC * x * y, axis=-1)


def to_hyperboloid(p) -> np.ndarray:
    p = _as_h3(p)
    return upper_to_hyperboloid(np.array([p.z]), np.array([p.t]))[0]


def upper_to_hyperboloid(z, t) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    s = (np.abs(z) ** 2 + t * t) / t
    x = np.empty(z.shape + (4,))
    x[..., 0] = (s + 1 / t) / 2
    x[..., 3] = (s - 1 / t) / 2
    x[..., 1] = z.real / t
    x[..., 2] = z.imag / t
    return x


def hyperboloid_to_upper(x):
    x = np.asarray(x, dtype=float)
    t = 1.0 / (x[..., 0] - x[..., 3])
    z = (x[..., 1] + 1j * x[..., 2]) * t
    return z, t


def from_hyperboloid(x, plane: bool = False):
    z, t = hyperboloid_to_upper(x)
    if plane:
        return H2Point(complex(z.real + 1j * t))
    return H3Point(complex(z), float(t))


def hdist(x, y):
    """Distance via the chordal form, accurate for nearby points."""
    dx = np.asarray(x) - np.asarray(y)
    q = np.maximum(ldot(dx, dx), 0.0)
    return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)


def normalize(x):
    """Push a nearly-unit future vector back onto the hyperboloid."""
    x = np.array(x, dtype=float)
    x[..., 0] = np.sqrt(1.0 + np.sum(x[..., 1:] ** 2, axis=-1))
    return x


def log_map(x, y):
    """Tangent vector at x pointing to y with length dist(x, y)."""
    x, y = np.asarray(x), np.asarray(y)
    d = hdist(x, y)
    u = y + ldot(x, y)[..., None] * x
    sh = np.sinh(d)
    scale = np.where(d > 1e-12, d / np.where(sh == 0, 1.0, sh), 1.0)
    return scale[..., None] * u


def exp_map(x, v):
    x, v = np.asarray(x), np.asarray(v)
    nv = np.sqrt(np.maximum(ldot(v, v), 0.0))
    sinc = np.where(nv > 1e-12, np.sinh(nv) / np.where(nv == 0, 1.0, nv), 1.0)
    return normalize(np.cosh(nv)[..., None] * x + sinc[..., None] * v)


def point_along(x, y, s):
    """Point at distance s from x on the geodesic toward y."""
    x, y = np.asarray(x), np.asarray(y)
    d = hdist(x, y)
    u = y + ldot(x, y)[..., None] * x
    nu = np.sqrt(np.maximum(ldot(u, u), 0.0))
    unit = u / np.where(nu == 0, 1.0, nu)[..., None]
    s = np.minimum(np.asarray(s, dtype=float), d)
    return normalize(np.cosh(s)[..., None] * x + np.sinh(s)[..., None] * unit)


_PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, 1j], [-1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def lorentz_matrix(mats) -> np.ndarray:
    """4x4 real matrices of the action H -> A H A* for a stack of SL(2,C) matrices."""
    mats = np.asarray(mats, dtype=complex)
    single = mats.ndim == 2
    if single:
        mats = mats[None]
    herm = np.einsum("nij,kjl,nml->nkim", mats, _PAULI, mats.conj())
    out = np.empty(mats.shape[:1] + (4, 4))
    out[:, 0, :] = (herm[:, :, 0, 0] + herm[:, :, 1, 1]).real / 2
    out[:, 3, :] = (herm[:, :, 0, 0] - herm[:, :, 1, 1]).real / 2
    out[:, 1, :] = herm[:, :, 0, 1].real
    out[:, 2, :] = herm[:, :, 0, 1].imag
    return out[0] if single else out


# ---------------------------------------------------------------------------
# thin triangles


def triangle_insize(x, y, z):
    """Diameter of the internal-point triple of geodesic triangles (vectorized).

    The internal points sit on each side at the Gromov-product distances
    from the vertices. The two points next to a vertex with Gromov product g
    are at distance 2 asinh(sinh(g) sin(angle/2)), and the half-angle sine
    comes from the side lengths alone, which stays accurate for huge
    triangles. Degenerate (collinear) triangles give 0.
    """
    return insize_from_sides(hdist(y, z), hdist(x, z), hdist(x, y))


def insize_from_sides(a, b, c):
    """Insize from opposite side lengths a = d(y,z), b = d(x,z), c = d(x,y)."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    gx = np.maximum((b + c - a) / 2, 0.0)
    gy = np.maximum((a + c - b) / 2, 0.0)
    gz = np.maximum((a + b - c) / 2, 0.0)

    def chord(g, g1, g2, s1, s2):
        with np.errstate(invalid="ignore", divide="ignore"):
            half_sin_sq = np.sinh(g1) * np.sinh(g2) / (np.sinh(s1) * np.sinh(s2))
        half_sin_sq = np.where(np.isfinite(half_sin_sq), np.clip(half_sin_sq, 0.0, 1.0), 0.0)
        return 2.0 * np.arcsinh(np.sinh(g) * np.sqrt(half_sin_sq))

    dx = chord(gx, gy, gz, b, c)
    dy = chord(gy, gx, gz, a, c)
    dz = chord(gz, gx, gy, a, b)
    return np.maximum.reduce([dx, dy, dz])


def sample_disc(rng, count: int, radius: float) -> np.ndarray:
    """Area-uniform points in the hyperbolic disc of given radius about i."""
    u = rng.random(count)
    r = np.arccosh(1.0 + u * (np.cosh(radius) - 1.0))
    theta = rng.random(count) * 2 * np.pi
    x = np.zeros((count, 4))
    x[:, 0] = np.cosh(r)
    x[:, 1] = np.sinh(r) * np.cos(theta)
    x[:, 3] = np.sinh(r) * np.sin(theta)
    return normalize(x)


@dataclass(frozen=True)
class DeltaEstimate:
    delta: float
    sample_count: int
    radius: float
    seed: int

    def __float__(self):
        return self.delta


def rips_delta_estimate(sample_count: int, region: float = 10.0, seed: int = 0,
                        batch: int = 20000) -> DeltaEstimate:
    """Sample maximum of triangle insize over triangles with vertices in a disc.

    region is the hyperbolic radius of the disc about i in H^2.
    """
    if sample_count < 1 or region <= 0:
        raise InvalidInput("need sample_count >= 1 and region > 0")
    rng = np.random.default_rng(seed)
    best = 0.0
    done = 0
    while done < sample_count:
        m = min(batch, sample_count - done)
        pts = sample_disc(rng, 3 * m, region).reshape(3, m, 4)
        best = max(best, float(np.max(triangle_insize(pts[0], pts[1], pts[2]))))
        done += m
    return DeltaEstimate(best, sample_count, region, seed)


@dataclass(frozen=True)
class CheckResult:
    holds: bool
    margin: float


def check_obtuse_inequality(x: H2Point, y: H2Point, z: H2Point, delta: float,
                            tol: float = TOL) -> CheckResult:
    """d(x,y) >= d(x,z) + d(y,z) - 4 delta when the angle at z is at least pi/2."""
    delta = float(delta)
    if dist(x, z) > 0 and dist(y, z) > 0:
        if angle_at(z, x, y) < np.pi / 2 - tol:
            raise PreconditionError("angle at z is below pi/2")
    margin = dist(x, y) - dist(x, z) - dist(y, z) + 4 * delta
    return CheckResult(margin >= -tol, margin)


def _cross3(x, v):
    # Lorentz cross product on the H^2 slice (coordinates 0, 1, 3)
    x, v = np.asarray(x), np.asarray(v)
    a, b = x[..., [0, 1, 3]], v[..., [0, 1, 3]]
    c = np.cross(a, b) * np.array([-1.0, 1.0, 1.0])
    out = np.zeros(np.broadcast_shapes(x.shape, v.shape))
    out[..., [0, 1, 3]] = c
    return out


def sample_obtuse_triangles(rng, count: int, max_side: float = 8.0, region: float = 3.0):
    """Hyperboloid triples (x, y, z) in the H^2 slice with angle >= pi/2 at z."""
    z = sample_disc(rng, count, region)
    e1 = np.tile([0.0, 1.0, 0.0, 0.0], (count, 1))
    e1 = e1 + ldot(z, e1)[:, None] * z
    e1 /= np.sqrt(ldot(e1, e1))[:, None]
    e2 = _cross3(z, e1)
    t1 = 2 * np.pi * rng.random(count)
    t2 = t1 + np.pi / 2 + (np.pi / 2) * rng.random(count)
    sides = max_side * rng.random((2, count))
    u1 = np.cos(t1)[:, None] * e1 + np.sin(t1)[:, None] * e2
    u2 = np.cos(t2)[:, None] * e1 + np.sin(t2)[:, None] * e2
    return exp_map(z, sides[0][:, None] * u1), exp_map(z, sides[1][:, None] * u2), z


def obtuse_margins(x, y, z, delta):
    """Vectorized d(x,y) - d(x,z) - d(y,z) + 4 delta."""
    return hdist(x, y) - hdist(x, z) - hdist(y, z) + 4 * float(delta)


@dataclass(frozen=True)
class GeodesicPath:
    vertices: tuple
    stairstep: bool = False
    lengths: tuple = field(init=False)
    angles: tuple = field(init=False)
    orientations: tuple = field(init=False)

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(verts) < 2 or not all(isinstance(v, H2Point) for v in verts):
            raise InvalidInput("a path needs at least two H2 points")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "lengths", tuple(dist(p, q) for p, q in zip(verts, verts[1:])))
        angles, signs = [], []
        hyp = [to_hyperboloid(v) for v in verts]
        for i in range(1, len(verts) - 1):
            x = hyp[i]
            inc = -log_map(x, hyp[i - 1])
            out = log_map(x, hyp[i + 1])
            if ldot(inc, inc) == 0 or ldot(out, out) == 0:
                angles.append(float("nan"))
                signs.append(0)
                continue
            angles.append(angle_at(verts[i], verts[i - 1], verts[i + 1]))
            signs.append(int(np.sign(ldot(_cross3(x, inc), out))))
        object.__setattr__(self, "angles", tuple(angles))
        object.__setattr__(self, "orientations", tuple(signs))
        if self.stairstep and any(s1 * s2 != -1 for s1, s2 in zip(signs, signs[1:])):
            raise PreconditionError("stairstep path must alternate turn orientation")


def stairstep_path(lengths, start: complex = 1j, heading: float = 0.0,
                   first_turn: int = 1) -> GeodesicPath:
    """Build a path of segments meeting at right angles with alternating turns."""
    x = to_hyperboloid(H2Point(start))
    # unit tangent at x: rotate the tangent basis of the base point by heading
    e1 = np.array([0.0, 1.0, 0.0, 0.0])
    e1 = e1 + ldot(x, e1) * x
    e1 /= np.sqrt(ldot(e1, e1))
    e2 = _cross3(x, e1)
    v = np.cos(heading) * e1 + np.sin(heading) * e2
    verts = [x]
    turn = first_turn
    for k, s in enumerate(lengths):
        if k > 0:
            v = turn * _cross3(x, v)
            turn = -turn
        y = normalize(np.cosh(s) * x + np.sinh(s) * v)
        # transported unit tangent at the endpoint
        v = np.sinh(s) * x + np.cosh(s) * v
        v = v + ldot(y, v) * y
        v /= np.sqrt(ldot(v, v))
        x = y
        verts.append(x)
    pts = tuple(from_hyperboloid(p, plane=True) for p in verts)
    return GeodesicPath(pts, stairstep=True)


def check_stairstep(path: GeodesicPath, delta: float, tol: float = TOL,
                    angle_tol: float = 1e-6) -> CheckResult:
    """d(x0, xn) >= sum of segment lengths - 4 (n-1) delta for stairstep paths."""
    verts = path.vertices
    n = len(verts) - 1
    hyp = np.array([to_hyperboloid(v) for v in verts])
    for i in range(len(hyp)):
        if np.any(hdist(hyp[i], hyp[i + 1:]) <= 1e-12):
            raise PreconditionError("repeated vertex in stairstep path")
    if any(abs(a - np.pi / 2) > angle_tol for a in path.angles):
        raise PreconditionError("stairstep corners must be right angles")
    signs = path.orientations
    if any(s1 * s2 != -1 for s1, s2 in zip(signs, signs[1:])):
        raise PreconditionError("stairstep turns must alternate")
    margin = dist(verts[0], verts[-1]) - sum(path.lengths) + 4 * (n - 1) * float(delta)
    if n == 1:
        margin = 0.0
    return CheckResult(margin >= -tol, margin)
