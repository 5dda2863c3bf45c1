"""Discrete equivariant harmonic maps from a triangulated fundamental domain.

The reference surface is the regular octagon in the Poincare disc. Its
vertices fall into classes under the side pairings; every vertex v stores
a representative class and a word w_v so that its image is
rho(w_v) x_class. Maps built this way are equivariant by construction, and
minimization only moves one point per class.

Energies use cotangent weights of the disc-chart triangulation (the chart
is conformal, and the energy only sees the conformal class). Images live on
the hyperboloid model of H^3, so real and complex representations share
the same code; real ones keep the images in the H^2 slice.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay

from .errors import ConstructionError, InconsistentMapError, InvalidInput
from .fuchsian import SIDE_PAIRINGS, GroupRep, disc_side_pairing, disc_to_upper, octagon_geometry
from .hypgeo import (METRIC, MoebiusMap, exp_map, hdist, hyperboloid_to_upper, ldot, log_map,
                     lorentz_matrix, upper_to_hyperboloid)
from .surface_words import CurvePair, Word, evaluate, iterate_automorphism, twist_automorphism

log = logging.getLogger(__name__)

BASE_POINT = np.array([1.0, 0.0, 0.0, 0.0])
EQUIVARIANCE_TOL = 1e-6
# relative energy roundoff beyond which a solve is refused
PRECISION_LIMIT = 1e-3


# ---------------------------------------------------------------------------
# meshes


@dataclass(frozen=True, eq=False)
class FundamentalDomainMesh:
    coords: np.ndarray  # complex reference coordinates, shape (V,)
    triangles: np.ndarray  # (T, 3)
    edges: np.ndarray  # surface edges (E, 2), identified boundary edges once
    weights: np.ndarray  # (E,)
    vertex_class: np.ndarray  # (V,)
    class_rep: np.ndarray  # (K,) representative vertex of each class
    words: tuple  # Word per vertex: image(v) = rho(word) x_class
    pairings: tuple  # (vertex, partner, Word): image(partner) = rho(word) image(vertex)
    genus: int = 2
    level: int = -1
    twist: tuple | None = None
    kind: str = "octagon"

    @property
    def n_classes(self) -> int:
        return len(self.class_rep)

    def scaled(self, factor: float) -> "FundamentalDomainMesh":
        """Same mesh with all weights multiplied by factor."""
        from dataclasses import replace

        return replace(self, weights=self.weights * factor)

    def to_json(self):
        return {
            "kind": self.kind, "level": self.level, "genus": self.genus,
            "coords": [[float(z.real), float(z.imag)] for z in self.coords],
            "triangles": self.triangles.tolist(),
            "edges": self.edges.tolist(),
            "weights": self.weights.tolist(),
            "vertex_class": self.vertex_class.tolist(),
            "words": [str(w) for w in self.words],
            "pairings": [[int(a), int(b), str(w)] for a, b, w in self.pairings],
            "twist": None if self.twist is None else {"pair": self.twist[0].to_json(), "n": self.twist[1]},
        }


def cotan_weights(points: np.ndarray, triangles: np.ndarray):
    """Per-half-edge cotangent weights: (i, j, w) with w = cot(opposite)/2."""
    p = np.stack([points.real, points.imag], -1)
    a, b, c = p[triangles[:, 0]], p[triangles[:, 1]], p[triangles[:, 2]]

    def cot(o, i, j):
        u, v = i - o, j - o
        return (u * v).sum(1) / np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])

    i = np.concatenate([triangles[:, 1], triangles[:, 2], triangles[:, 0]])
    j = np.concatenate([triangles[:, 2], triangles[:, 0], triangles[:, 1]])
    w = 0.5 * np.concatenate([cot(a, b, c), cot(b, c, a), cot(c, a, b)])
    return i, j, w


def _assemble(coords, tris, vertex_class, words, pairings, genus, level, twist, kind):
    """Merge half-edges into surface edges; boundary copies of one edge merge by holonomy."""
    n = len(coords)
    i, j, w = cotan_weights(coords, tris)
    key = np.minimum(i, j) * n + np.maximum(i, j)
    uniq, inv, cnt = np.unique(key, return_inverse=True, return_counts=True)
    wsum = np.bincount(inv, w)
    u, v = uniq // n, uniq % n
    interior = cnt == 2
    edges = [np.stack([u[interior], v[interior]], 1)]
    weights = [wsum[interior]]
    merged: dict = {}
    for a, b, wt in zip(u[~interior], v[~interior], wsum[~interior]):
        ca, cb = vertex_class[a], vertex_class[b]
        hol = str(words[a].inverse() * words[b])
        hol_rev = str(words[b].inverse() * words[a])
        k = min((ca, cb, hol), (cb, ca, hol_rev))
        if k in merged:
            merged[k][2] += wt
            merged[k][3] += 1
        else:
            merged[k] = [a, b, wt, 1]
    for a, b, wt, _ in merged.values():
        edges.append(np.array([[a, b]]))
        weights.append(np.array([wt]))
    reps = np.full(vertex_class.max() + 1, -1)
    for vtx in range(n - 1, -1, -1):
        if words[vtx].is_empty:
            reps[vertex_class[vtx]] = vtx
    if np.any(reps < 0):
        raise ConstructionError("a vertex class has no representative with empty word")
    return FundamentalDomainMesh(
        np.asarray(coords), np.asarray(tris), np.concatenate(edges).astype(int),
        np.concatenate(weights), vertex_class, reps, tuple(words), tuple(pairings),
        genus, level, twist, kind)


def _hmid(a, b):
    x, y = _disc_to_hyp(a), _disc_to_hyp(b)
    m = x + y
    m = m / np.sqrt(-ldot(m, m))[..., None]
    return complex((m[1] + 1j * m[3]) / (1 + m[0]))


def _disc_to_hyp(w):
    # H^2 slice coordinates (X0, X1, 0, X3) of a disc point
    w = np.asarray(w, dtype=complex)
    n = 1 - np.abs(w) ** 2
    return np.stack([(1 + np.abs(w) ** 2) / n, 2 * w.real / n, np.zeros_like(n), 2 * w.imag / n], -1)


def _subdivided_fan(level):
    geo = octagon_geometry()
    verts = [0j] + [complex(geo.corner(k)) for k in range(8)]
    tris = [(0, 1 + k, 1 + (k + 1) % 8) for k in range(8)]
    for _ in range(level):
        cache: dict = {}
        new = []

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                verts.append(_hmid(verts[i], verts[j]))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in tris:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        tris = new
    return np.array(verts), np.array(tris)


def _side_membership(coords):
    geo = octagon_geometry()
    centers = np.array([geo.side_center(k) for k in range(8)])
    gap = np.abs(np.abs(coords[:, None] - centers[None, :]) - geo.side_circle_radius)
    return gap < 1e-10, centers, geo.side_circle_radius


def _delaunay_with_push(coords, max_rounds=500):
    """Delaunay triangulation of the octagon with boundary edges kept Gabriel.

    Triangles outside the octagon are dropped. An interior vertex inside the
    diametral circle of a boundary edge is pushed just outside it, so no
    boundary edge has an obtuse opposite angle and all weights stay >= 0.
    """
    coords = coords.copy()
    on_side, centers, radius = _side_membership(coords)
    bnd = on_side.any(1)
    for _ in range(max_rounds):
        tri = Delaunay(np.stack([coords.real, coords.imag], -1))
        t = tri.simplices
        cen = coords[t].mean(1)
        t = t[~(np.abs(cen[:, None] - centers[None, :]) < radius * (1 - 1e-12)).any(1)]
        moved = False
        for k in range(3):
            a, b, o = t[:, k], t[:, (k + 1) % 3], t[:, (k + 2) % 3]
            sel = bnd[a] & bnd[b] & ~bnd[o]
            mid = (coords[a] + coords[b]) / 2
            rad = np.abs(coords[a] - coords[b]) / 2
            off = coords[o] - mid
            sel &= np.abs(off) < rad * 1.0001
            if sel.any():
                verts, first = np.unique(o[sel], return_index=True)
                idx = np.flatnonzero(sel)[first]
                coords[verts] = mid[idx] + off[idx] / np.abs(off[idx]) * rad[idx] * 1.05
                moved = True
                break
        if not moved:
            return coords, np.sort(t, axis=1)
    raise ConstructionError("boundary encroachment repair did not settle")


def _mobius_disc(m, w):
    return (m[0, 0] * w + m[0, 1]) / (m[1, 0] * w + m[1, 1])


@functools.lru_cache(maxsize=32)
def _octagon_base(level):
    coords, _ = _subdivided_fan(level)
    coords, tris = _delaunay_with_push(coords)
    on_side, _, _ = _side_membership(coords)
    nside = on_side.sum(1)
    n = len(coords)
    genus = 2
    vclass = np.full(n, -1)
    words = [Word.empty(genus)] * n
    pairings = []
    corners = np.flatnonzero(nside == 2)
    if len(corners) != 8:
        raise ConstructionError("octagon mesh must have 8 corners")
    # side-interior boundary points: source sides carry the representatives
    next_class = 0
    for gen, (src, dst) in sorted(SIDE_PAIRINGS.items()):
        m = disc_side_pairing(src, dst)
        src_pts = np.flatnonzero(on_side[:, src] & (nside == 1))
        dst_pts = np.flatnonzero(on_side[:, dst] & (nside == 1))
        if len(src_pts) != len(dst_pts):
            raise ConstructionError("paired sides carry different numbers of vertices")
        img = _mobius_disc(m, coords[src_pts])
        for q, z in zip(src_pts, img):
            p = dst_pts[np.argmin(np.abs(coords[dst_pts] - z))]
            if abs(coords[p] - z) > 1e-9:
                raise ConstructionError("side pairing does not match boundary vertices")
            vclass[q] = vclass[p] = next_class
            next_class += 1
            words[p] = Word.generator(gen, genus)
            pairings.append((int(q), int(p), Word.generator(gen, genus)))
    # corners: one class, words by breadth-first search over the pairings
    corner_links = []
    for gen, (src, dst) in sorted(SIDE_PAIRINGS.items()):
        m = disc_side_pairing(src, dst)
        for q in corners[on_side[corners, src]]:
            z = _mobius_disc(m, coords[q])
            p = corners[np.argmin(np.abs(coords[corners] - z))]
            if abs(coords[p] - z) > 1e-9:
                raise ConstructionError("side pairing does not match corners")
            corner_links.append((int(q), int(p), gen))
            pairings.append((int(q), int(p), Word.generator(gen, genus)))
    corner_word = {int(corners[0]): Word.empty(genus)}
    frontier = [int(corners[0])]
    while frontier:
        nxt = []
        for c in frontier:
            for q, p, gen in corner_links:
                g = Word.generator(gen, genus)
                if q == c and p not in corner_word:
                    corner_word[p] = g * corner_word[c]
                    nxt.append(p)
                elif p == c and q not in corner_word:
                    corner_word[q] = g.inverse() * corner_word[c]
                    nxt.append(q)
        frontier = nxt
    if len(corner_word) != 8:
        raise ConstructionError("corner identifications are not connected")
    for c, w in corner_word.items():
        vclass[c] = next_class
        words[c] = w
    next_class += 1
    for v in np.flatnonzero(vclass < 0):
        vclass[v] = next_class
        next_class += 1
    return coords, tris, vclass, tuple(words), tuple(pairings)


@functools.lru_cache(maxsize=64)
def build_mesh(level: int, twist: tuple | None = None) -> FundamentalDomainMesh:
    """Octagon mesh with 8 * 4**level triangles.

    twist = (pair, n) precomposes every side-pairing word with the n-th
    power of the Dehn twist about pair.gamma, so minimizing over the mesh
    estimates the energy of the twisted marking.
    """
    if level < 0:
        raise InvalidInput("refinement level must be >= 0")
    coords, tris, vclass, words, pairings = _octagon_base(level)
    if twist is not None:
        pair, n = twist
        if not isinstance(pair, CurvePair) or int(n) < 0:
            raise InvalidInput("twist spec must be (CurvePair, n >= 0)")
        images = twist_automorphism(pair)
        if n == 0:
            twist = None
        else:
            words = tuple(iterate_automorphism(w, images, n) for w in words)
            pairings = tuple((a, b, iterate_automorphism(w, images, n)) for a, b, w in pairings)
    return _assemble(coords, tris, vclass, words, pairings, 2, level, twist, "octagon")


def cylinder_mesh(width: float, cols: int, rows: int, generator: int = 1, genus: int = 2):
    """Flat strip [0, width] x [0, 1] with y = 0 and y = 1 identified by a generator."""
    if cols < 1 or rows < 2 or width <= 0:
        raise InvalidInput("need width > 0, cols >= 1, rows >= 2")
    xs = np.linspace(0, width, cols + 1)
    ys = np.linspace(0, 1, rows + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    coords = (gx + 1j * gy).ravel()
    idx = np.arange(len(coords)).reshape(cols + 1, rows + 1)
    tris = []
    for i in range(cols):
        for j in range(rows):
            a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
            tris += [(a, b, c), (a, c, d)]
    vclass = np.empty(len(coords), dtype=int)
    words = [Word.empty(genus)] * len(coords)
    pairings = []
    g = Word.generator(generator, genus)
    for i in range(cols + 1):
        for j in range(rows + 1):
            vclass[idx[i, j]] = i * rows + (j % rows)
        words[idx[i, rows]] = g
        pairings.append((int(idx[i, 0]), int(idx[i, rows]), g))
    return _assemble(coords, np.array(tris), vclass, tuple(words), tuple(pairings), genus, -1, None, "cylinder")


def reference_positions(mesh: FundamentalDomainMesh) -> np.ndarray:
    """Hyperboloid points of the reference vertices (octagon meshes)."""
    if mesh.kind != "octagon":
        raise InvalidInput("reference positions exist for octagon meshes only")
    z = disc_to_upper(mesh.coords)
    return upper_to_hyperboloid(z.real + 0j, z.imag)


# ---------------------------------------------------------------------------
# maps and energy


@dataclass(frozen=True, eq=False)
class EquivariantMap:
    """Vertex images equivariant for rep, stored in the coordinates of `frame`.

    With frame g the stored images are g applied to the true images, and they
    are equivariant for the conjugated representation g rho g^-1 (`work_rep`).
    Far-reaching maps lose precision in the original frame, so solvers keep a
    centred one.
    """

    images: np.ndarray  # (V, 4) hyperboloid points
    rep: GroupRep
    frame: MoebiusMap | None = None

    @functools.cached_property
    def work_rep(self) -> GroupRep:
        return self.rep if self.frame is None else self.rep.conjugated(self.frame)

    def original_images(self) -> np.ndarray:
        if self.frame is None:
            return self.images
        lf = lorentz_matrix(self.frame.inverse().matrix)
        return normalize_rows(self.images @ lf.T)

    def to_json(self):
        out = {"images": self.images.tolist(), "rep": self.rep.to_json()}
        if self.frame is not None:
            out["frame"] = self.frame.to_json()
        return out


def _lorentz_inverse(m):
    return METRIC[:, None] * np.swapaxes(m, -1, -2) * METRIC[None, :]


@functools.lru_cache(maxsize=16)
def _word_lorentz(rep: GroupRep, words: tuple):
    cache: dict = {}
    out = np.empty((len(words), 4, 4))
    for k, w in enumerate(words):
        s = str(w)
        if s not in cache:
            cache[s] = lorentz_matrix(evaluate(rep, w).matrix)
        out[k] = cache[s]
    return out


def map_from_classes(mesh, rep, class_points, frame=None) -> EquivariantMap:
    """Extend class points (given in `frame` coordinates) to every vertex."""
    work = rep if frame is None else rep.conjugated(frame)
    lw = _word_lorentz(work, mesh.words)
    images = np.einsum("vij,vj->vi", lw, class_points[mesh.vertex_class])
    return EquivariantMap(images, rep, frame)


def equivariance_residual(mesh, emap: EquivariantMap) -> float:
    if not mesh.pairings:
        return 0.0
    q, p = (np.array([t[k] for t in mesh.pairings]) for k in (0, 1))
    lw = _word_lorentz(emap.work_rep, tuple(t[2] for t in mesh.pairings))
    moved = np.einsum("nij,nj->ni", lw, emap.images[q])
    return float(np.max(hdist(emap.images[p], moved)))


def discrete_energy(mesh, emap: EquivariantMap, tol: float = EQUIVARIANCE_TOL) -> float:
    """Half the weighted sum of squared edge lengths of the image."""
    res = equivariance_residual(mesh, emap)
    if res > tol:
        raise InconsistentMapError(f"equivariance residual {res:.3e} exceeds {tol}")
    u, v = mesh.edges.T
    d = hdist(emap.images[u], emap.images[v])
    return float(0.5 * np.sum(mesh.weights * d * d))


class _Problem:
    """Directed-edge data for sweeps over vertex classes."""

    def __init__(self, mesh, rep):
        u, v = mesh.edges.T
        cu, cv = mesh.vertex_class[u], mesh.vertex_class[v]
        # transport along each edge from the reduced relative word, which is
        # short even when the vertex words are long
        rel = tuple(mesh.words[a].inverse() * mesh.words[b] for a, b in zip(u, v))
        l_uv = _word_lorentz(rep, rel)
        self.owner = np.concatenate([cu, cv])
        self.other = np.concatenate([cv, cu])
        self.lmat = np.concatenate([l_uv, _lorentz_inverse(l_uv)])
        self.w = np.concatenate([mesh.weights, mesh.weights])
        self.lnorm = np.abs(self.lmat).max(axis=(1, 2))
        # loop edges are seen twice by their own class; halve their energy share
        self.share = np.where(self.owner == self.other, 0.5, 1.0)
        self.k = mesh.n_classes
        self.wsum = np.bincount(self.owner, self.w, minlength=self.k)
        self.batches = self._color_batches()

    def _color_batches(self):
        k = self.k
        nbrs = [set() for _ in range(k)]
        for a, b in zip(self.owner, self.other):
            if a != b:
                nbrs[a].add(b)
        color = np.full(k, -1)
        order = sorted(range(k), key=lambda c: -len(nbrs[c]))
        for c in order:
            used = {color[n] for n in nbrs[c]}
            col = 0
            while col in used:
                col += 1
            color[c] = col
        batches = []
        for col in range(color.max() + 1):
            cls = np.flatnonzero(color == col)
            ent = np.flatnonzero(color[self.owner] == col)
            local = np.searchsorted(cls, self.owner[ent])
            batches.append((cls, ent, local))
        return batches

    def total_energy(self, x, with_roundoff=False):
        y = np.einsum("eij,ej->ei", self.lmat, x[self.other])
        xo = x[self.owner]
        d = hdist(xo, y)
        e = float(0.25 * np.sum(self.w * d * d))
        if not with_roundoff:
            return e
        # floating error bound of the chordal distances: y = L x carries an
        # absolute error ~ eps |L| |x|, and d^2 moves by about |x - y| times that
        err_y = self.lnorm * x[self.other, 0]
        scale = 0.25 * np.sum(self.w * (xo[:, 0] + y[:, 0]) * (err_y + xo[:, 0]))
        return e, float(16 * np.finfo(float).eps * scale)

    def _local(self, x, cls, ent, local):
        y = np.einsum("eij,ej->ei", self.lmat[ent], x[self.other[ent]])
        xo = x[self.owner[ent]]
        d = hdist(xo, y)
        f = np.bincount(local, self.share[ent] * 0.5 * self.w[ent] * d * d, minlength=len(cls))
        return f, xo, y

    def sweep(self, x, inner_steps=3, max_halvings=20):
        for cls, ent, local in self.batches:
            for _ in range(inner_steps):
                f0, xo, y = self._local(x, cls, ent, local)
                g = self.w[ent, None] * log_map(xo, y)
                grad = np.stack([np.bincount(local, g[:, c], minlength=len(cls)) for c in range(4)], 1)
                step = grad / self.wsum[cls, None]
                if np.max(np.abs(step)) < 1e-15:
                    break
                alpha = np.ones(len(cls))
                pending = np.ones(len(cls), dtype=bool)
                start = x[cls].copy()
                for _ in range(max_halvings):
                    trial = exp_map(start, alpha[:, None] * step)
                    x[cls[pending]] = trial[pending]
                    f1, _, _ = self._local(x, cls, ent, local)
                    bad = pending & (f1 > f0)
                    x[cls[bad]] = start[bad]
                    pending = bad
                    if not pending.any():
                        break
                    alpha[pending] *= 0.5
                x[cls[pending]] = start[pending]
        return x


def normalize_rows(x):
    return x / np.sqrt(-ldot(x, x))[:, None]


def _centering_map(x) -> MoebiusMap:
    """Moebius map taking the normalized mean of the points to the base point."""
    m = x.mean(0)
    m = m / np.sqrt(-ldot(m, m))
    z, t = hyperboloid_to_upper(m)
    s = np.sqrt(t)
    return MoebiusMap.from_matrix(np.array([[1 / s, -z / s], [0, s]]))


@dataclass
class MinimizeResult:
    energy: float
    map: EquivariantMap
    iterations: int
    converged: bool
    trace: list = field(default_factory=list)
    class_points: np.ndarray | None = None  # in map.frame coordinates
    roundoff: float = 0.0  # floating error bound of the final energy


def _prolongate(coarse, coarse_map, fine):
    """Fine class points from barycentric interpolation of coarse images.

    The points are in the coarse map's frame coordinates.
    """
    tri = Delaunay(np.stack([coarse.coords.real, coarse.coords.imag], -1))
    pts = fine.coords[fine.class_rep]
    xy = np.stack([pts.real, pts.imag], -1)
    simplex = tri.find_simplex(xy)
    kept = {tuple(t) for t in np.sort(coarse.triangles, 1)}
    cen = coarse.coords[coarse.triangles].mean(1)
    out = np.empty((len(pts), 4))
    for k, (s, z) in enumerate(zip(simplex, pts)):
        if s < 0 or tuple(np.sort(tri.simplices[s])) not in kept:
            t = coarse.triangles[np.argmin(np.abs(cen - z))]
        else:
            t = tri.simplices[s]
        corners = np.stack([coarse.coords[t].real, coarse.coords[t].imag], -1)
        mat = np.vstack([corners.T, np.ones(3)])
        bary = np.clip(np.linalg.solve(mat, np.array([z.real, z.imag, 1.0])), 0, None)
        bary /= bary.sum()
        m = bary @ coarse_map.images[t]
        out[k] = m / np.sqrt(-ldot(m, m))
    return out


def _initial_points(mesh, rep, init, tol, max_iter):
    """(class points, frame they are expressed in or None for the original)."""
    if isinstance(init, EquivariantMap):
        return init.images[mesh.class_rep].copy(), init.frame
    if isinstance(init, tuple):
        pts, frame = init
        return np.array(pts, dtype=float), frame
    if isinstance(init, np.ndarray):
        return init.copy(), None
    if init == "reference":
        return reference_positions(mesh)[mesh.class_rep].copy(), None
    if init != "centroid":
        raise InvalidInput(f"unknown init {init!r}")
    # the level-0 mesh has two classes; twisted transports on it are too long
    # for double precision, so twisted problems start one level finer
    base_level = 1 if mesh.twist else 0
    if mesh.kind != "octagon" or mesh.level <= base_level:
        return np.tile(BASE_POINT, (mesh.n_classes, 1)), None
    coarse = build_mesh(mesh.level - 1, mesh.twist)
    res = minimize(coarse, rep, "centroid", tol=max(tol, 1e-7), max_iter=max_iter)
    return _prolongate(coarse, res.map, mesh), res.map.frame


def minimize(mesh, rep: GroupRep, init="centroid", tol: float = 1e-8, max_iter: int = 100000,
             inner_steps: int = 3, callback=None) -> MinimizeResult:
    """Colored Gauss-Seidel sweeps of damped geodesic-centroid updates.

    Stops when one sweep lowers the energy by less than tol. The energy is
    checked to be nonincreasing after every sweep.
    """
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    x, frame = _initial_points(mesh, rep, init, tol, max_iter)
    # work in a frame centred on the initial points; the energy is invariant
    # and coordinates stay small, which keeps sweeps monotone in floating point
    centre = _centering_map(x)
    x = normalize_rows(x @ lorentz_matrix(centre.matrix).T)
    frame = centre if frame is None else centre @ frame
    work_rep = rep.conjugated(frame)
    prob = _Problem(mesh, work_rep)
    energy = prob.total_energy(x)
    trace = [energy]
    iterations = 0
    converged = False
    roundoff = 0.0
    for _ in range(max_iter):
        x = prob.sweep(x, inner_steps)
        new, roundoff = prob.total_energy(x, with_roundoff=True)
        if roundoff > PRECISION_LIMIT * new:
            raise ConstructionError(
                f"energy roundoff {roundoff:.2e} exceeds {PRECISION_LIMIT:g} of the energy; "
                "the twisted image is too long for double precision at this level")
        if new > energy + roundoff:
            raise ConstructionError(f"energy increased during a sweep: {energy!r} -> {new!r}")
        trace.append(new)
        if callback is not None:
            callback(len(trace) - 1, new)
        if energy - new < tol:
            energy = min(energy, new)
            converged = True
            break
        energy = new
        iterations += 1
    emap = map_from_classes(mesh, rep, x, frame)
    log.debug("level %s: energy %.12g after %d sweeps", mesh.level, energy, iterations)
    return MinimizeResult(energy, emap, iterations, converged, trace, x, roundoff)


# ---------------------------------------------------------------------------
# energy spectrum estimates


def identity_mesh_slack(level: int) -> float:
    """Relative excess of the identity map's discrete energy over the area."""
    mesh = build_mesh(level)
    from .fuchsian import genus2_octagon_rep

    rep = genus2_octagon_rep()
    emap = map_from_classes(mesh, rep, reference_positions(mesh)[mesh.class_rep])
    e = discrete_energy(mesh, emap)
    return abs(e / (4 * np.pi) - 1)


def mesh_hyperbolic_area(mesh) -> float:
    """Sum of hyperbolic areas of the geodesic triangles on the reference vertices."""
    x = reference_positions(mesh)
    t = mesh.triangles
    a, b, c = x[t[:, 0]], x[t[:, 1]], x[t[:, 2]]

    def angle(o, p, q):
        u, v = log_map(o, p), log_map(o, q)
        cosang = ldot(u, v) / np.sqrt(ldot(u, u) * ldot(v, v))
        return np.arccos(np.clip(cosang, -1, 1))

    return float(np.sum(np.pi - angle(a, b, c) - angle(b, c, a) - angle(c, a, b)))


@dataclass(frozen=True)
class SpectrumEstimate:
    energy: float
    coarse_energy: float
    extrapolated: float
    level: int
    n: int
    mesh_slack: float


def energy_spectrum_estimate(rep: GroupRep, pair: CurvePair | None = None, n: int = 0,
                             level: int = 3, tol: float = 1e-8, structure: str = "octagon",
                             max_iter: int = 100000) -> SpectrumEstimate:
    """Discrete upper estimate of the energy of the n-fold twisted marking.

    Reports the level-r minimum, the level r-1 minimum and their
    Richardson extrapolation assuming second-order convergence.
    """
    if structure != "octagon":
        raise InvalidInput("only the octagon conformal structure is meshed")
    if level < 1:
        raise InvalidInput("level must be >= 1 for an extrapolated estimate")
    twist = None if pair is None or n == 0 else (pair, int(n))
    coarse_mesh, fine_mesh = build_mesh(level - 1, twist), build_mesh(level, twist)
    coarse = minimize(coarse_mesh, rep, tol=tol, max_iter=max_iter)
    start = (_prolongate(coarse_mesh, coarse.map, fine_mesh), coarse.map.frame)
    fine = minimize(fine_mesh, rep, init=start, tol=tol, max_iter=max_iter)
    extrap = (4 * fine.energy - coarse.energy) / 3
    return SpectrumEstimate(fine.energy, coarse.energy, extrap, level, int(n), identity_mesh_slack(level))
