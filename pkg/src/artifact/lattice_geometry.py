"""Exact lattice geometry: polytopes, polar duality, Gorenstein cones and their faces.

Everything here works over the integers (or exact rationals through ``flint``).
Facet candidates for large point sets come from qhull, but every facet is
re-derived and checked with integer arithmetic before it is trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from math import gcd

import flint
import numpy as np

from .errors import BudgetError, ValidationError

Vector = tuple[int, ...]

BRUTE_FORCE_LIMIT = 12
MAX_FACE_RAYS = 40


# ---------------------------------------------------------------------------
# small exact helpers


def _primitive(v) -> Vector:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    if g == 0:
        return tuple(int(x) for x in v)
    return tuple(int(x) // g for x in v)


def dot(u, v) -> int:
    return sum(int(a) * int(b) for a, b in zip(u, v))


def int_rank(rows) -> int:
    rows = [list(r) for r in rows]
    if not rows or not rows[0]:
        return 0
    return flint.fmpz_mat(rows).rank()


def int_nullspace(rows, ncols: int) -> list[Vector]:
    """Integer basis (primitive vectors) of {x : rows @ x = 0}."""
    if not rows:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    X, nullity = flint.fmpz_mat([list(r) for r in rows]).nullspace()
    basis = []
    for j in range(nullity):
        basis.append(_primitive([int(X[i, j]) for i in range(ncols)]))
    return basis


def solve_rational(rows, rhs) -> list | None:
    """Some rational solution x of rows @ x = rhs, or None when inconsistent."""
    A = flint.fmpq_mat([list(r) for r in rows])
    n = A.ncols()
    aug = flint.fmpq_mat([list(r) + [b] for r, b in zip(rows, rhs)])
    if A.rank() != aug.rank():
        return None
    R, rank = aug.rref()
    x = [flint.fmpq(0)] * n
    row = 0
    for col in range(n):
        if row < rank and R[row, col] != 0:
            x[col] = R[row, n]
            row += 1
    return x


def _affine_data(points: list[Vector]):
    """Base point, integer basis of the direction space, and affine dimension."""
    p0 = points[0]
    diffs = [tuple(a - b for a, b in zip(p, p0)) for p in points[1:]]
    diffs = [list(d) for d in diffs if any(d)]
    if not diffs:
        return p0, [], 0
    R, rank = flint.fmpq_mat(diffs).rref()
    basis = []
    for i in range(rank):
        row = [R[i, j] for j in range(len(p0))]
        den = 1
        for x in row:
            q = int(x.q)
            den = den * q // gcd(den, q)
        basis.append(_primitive([int((x * den).p) for x in row]))
    return p0, basis, rank


def _hyperplane_through(subset: list[Vector], basis: list[Vector]) -> Vector | None:
    """Normal a in the direction space, orthogonal to all differences in ``subset``."""
    p0 = subset[0]
    diffs = [tuple(a - b for a, b in zip(p, p0)) for p in subset[1:]]
    # a = y @ basis ; conditions (basis @ diff) . y = 0
    rows = [[dot(b, d) for b in basis] for d in diffs]
    ns = int_nullspace(rows, len(basis)) if rows else None
    if ns is None or len(ns) != 1:
        return None
    y = ns[0]
    a = [sum(y[i] * basis[i][j] for i in range(len(basis))) for j in range(len(p0))]
    return _primitive(a)


def _facets_of_points(points: list[Vector]) -> tuple[tuple[Vector, int], ...]:
    """Facets (a, c) with a.x >= c, a inside the direction space of the hull."""
    p0, basis, d = _affine_data(points)
    if d == 0:
        return ()
    if d == 1:
        a = basis[0]
        vals = [dot(a, p) for p in points]
        return (
            (a, min(vals)),
            (tuple(-x for x in a), -max(vals)),
        )
    candidates: set[tuple[Vector, ...]] = set()
    if len(points) <= BRUTE_FORCE_LIMIT:
        for sub in combinations(range(len(points)), d):
            candidates.add(tuple(points[i] for i in sub))
    else:
        candidates = _qhull_candidates(points, basis, d)
    facets = {}
    for sub in candidates:
        a = _hyperplane_through(list(sub), basis)
        if a is None:
            continue
        vals = [dot(a, p) for p in points]
        lo, hi = min(vals), max(vals)
        c0 = dot(a, sub[0])
        if lo == c0 and hi > c0:
            key = (a, c0)
        elif hi == c0 and lo < c0:
            key = (tuple(-x for x in a), -c0)
        else:
            continue
        tight = [p for p, v in zip(points, vals) if v == c0]
        if _affine_data(tight)[2] == d - 1:
            facets[key] = True
    return tuple(sorted(facets))


def _qhull_candidates(points, basis, d):
    from scipy.spatial import ConvexHull

    B = np.array(basis, dtype=np.int64)
    cols = None
    for cand in combinations(range(B.shape[1]), d):
        if int_rank(B[:, cand].tolist()) == d:
            cols = list(cand)
            break
    P = np.array(points, dtype=float)[:, cols]
    hull = ConvexHull(P)
    out = set()
    for simplex in hull.simplices:
        out.add(tuple(points[i] for i in sorted(simplex)))
    return out


# ---------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class Polytope:
    vertices: tuple[Vector, ...]
    dim: int

    @property
    def ambient(self) -> int:
        return len(self.vertices[0])

    @cached_property
    def facets(self) -> tuple[tuple[Vector, int], ...]:
        return _facets_of_points(list(self.vertices))

    def contains(self, x) -> bool:
        p0, basis, d = _affine_data(list(self.vertices))
        if d < self.ambient:
            diff = [a - b for a, b in zip(x, p0)]
            M = flint.fmpz_mat([list(b) for b in basis] + [diff]) if basis else None
            if (M is None and any(diff)) or (M is not None and M.rank() > d):
                return False
        return all(dot(a, x) >= c for a, c in self.facets)

    def is_reflexive(self) -> bool:
        try:
            polar_dual(self)
        except ValidationError:
            return False
        return True


def make_polytope(vertex_rows) -> Polytope:
    rows = [tuple(int(x) for x in r) for r in vertex_rows]
    if not rows:
        raise ValidationError("empty vertex list")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ValidationError("mixed row lengths in vertex list")
    pts = sorted(set(rows))
    _, _, d = _affine_data(pts)
    if d == 0:
        return Polytope((pts[0],), 0)
    facets = _facets_of_points(pts)
    p0, basis, _ = _affine_data(pts)
    verts = []
    for p in pts:
        tight = [a for a, c in facets if dot(a, p) == c]
        if int_rank(tight) == d if tight else False:
            verts.append(p)
    return Polytope(tuple(verts), d)


def polar_dual(P: Polytope) -> Polytope:
    if P.dim != P.ambient:
        raise ValidationError("polar dual needs a full-dimensional polytope")
    dual = []
    for a, c in P.facets:
        if c >= 0:
            raise ValidationError("origin is not an interior point")
        if any(x % (-c) for x in a):
            raise ValidationError("polytope is not reflexive (non-integral dual vertex)")
        dual.append(tuple(x // (-c) for x in a))
    return make_polytope(dual)


# ---------------------------------------------------------------------------
# polytope text format


def format_polytope(P: Polytope) -> str:
    lines = [f"dim {P.ambient}"]
    lines += [" ".join(str(x) for x in v) for v in P.vertices]
    return "\n".join(lines) + "\n"


def parse_polytope(text: str) -> Polytope:
    d = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if d is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "dim":
                raise ValidationError(f"line {lineno}: expected 'dim d'")
            try:
                d = int(parts[1])
            except ValueError:
                raise ValidationError(f"line {lineno}: bad dimension {parts[1]!r}") from None
            if d < 0:
                raise ValidationError(f"line {lineno}: negative dimension")
            continue
        try:
            row = tuple(int(x) for x in line.split())
        except ValueError:
            raise ValidationError(f"line {lineno}: non-integer entry") from None
        if len(row) != d:
            raise ValidationError(f"line {lineno}: expected {d} entries, got {len(row)}")
        rows.append(row)
    if d is None:
        raise ValidationError("missing 'dim' header")
    if not rows:
        raise ValidationError("no vertices")
    return make_polytope(rows)


def read_polytope(path) -> Polytope:
    with open(path, encoding="utf-8") as fh:
        return parse_polytope(fh.read())


def write_polytope(P: Polytope, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_polytope(P))


# ---------------------------------------------------------------------------
# cones


@dataclass(frozen=True)
class Cone:
    rays: tuple[Vector, ...]
    degree_vector: Vector

    @property
    def ambient_rank(self) -> int:
        return len(self.degree_vector)

    def __post_init__(self):
        for r in self.rays:
            if dot(r, self.degree_vector) != 1:
                raise ValidationError("ray generator not at level 1 of the degree vector")

    @cached_property
    def base(self) -> Polytope:
        return make_polytope(self.rays)

    @cached_property
    def facet_normals(self) -> tuple[Vector, ...]:
        """Primitive inner facet normals, i.e. the ray generators of the dual cone."""
        out = []
        for a, c in _facets_of_points(list(self.rays)):
            u = [x - c * y for x, y in zip(a, self.degree_vector)]
            out.append(_primitive(u))
        return tuple(sorted(set(out)))

    @cached_property
    def dual(self) -> "Cone":
        normals = list(self.facet_normals)
        n = self.ambient_rank
        x = solve_rational(normals, [1] * len(normals))
        if x is None or any(v.q != 1 for v in x):
            raise ValidationError("dual cone has no integral degree vector (not Gorenstein)")
        deg = tuple(int(v.p) for v in x)
        if len(normals) and int_rank(normals) < n:
            raise ValidationError("cone is not full-dimensional")
        return Cone(tuple(normals), deg)

    def contains(self, x) -> bool:
        return all(dot(n, x) >= 0 for n in self.facet_normals)

    def level(self, x) -> int:
        return dot(x, self.degree_vector)


def gorenstein_cone(P: Polytope) -> Cone:
    polar_dual(P)
    rays = tuple(sorted(tuple(v) + (1,) for v in P.vertices))
    return Cone(rays, (0,) * P.ambient + (1,))


def check_reflexive_gorenstein(K: Cone, Kdual: Cone):
    """Return (deg, deg_star, index) for a dual pair of reflexive Gorenstein cones."""
    if K.ambient_rank != Kdual.ambient_rank:
        raise ValidationError("cones live in lattices of different rank")
    for r in K.rays:
        for n in Kdual.rays:
            if dot(r, n) < 0:
                raise ValidationError("cones are not dual (negative pairing)")
    if set(K.facet_normals) != set(Kdual.rays) or set(Kdual.facet_normals) != set(K.rays):
        raise ValidationError("cones are not dual")
    deg_star = solve_rational(list(K.rays), [1] * len(K.rays))
    deg = solve_rational(list(Kdual.rays), [1] * len(Kdual.rays))
    for sol in (deg, deg_star):
        if sol is None or any(v.q != 1 for v in sol):
            raise ValidationError("no integral Gorenstein degree vector")
    deg = tuple(int(v.p) for v in deg)
    deg_star = tuple(int(v.p) for v in deg_star)
    return deg, deg_star, dot(deg, deg_star)


def direct_sum(K1: Cone, K2: Cone) -> Cone:
    z1, z2 = (0,) * K1.ambient_rank, (0,) * K2.ambient_rank
    rays = [tuple(r) + z2 for r in K1.rays] + [z1 + tuple(r) for r in K2.rays]
    return Cone(tuple(sorted(rays)), tuple(K1.degree_vector) + tuple(K2.degree_vector))


# ---------------------------------------------------------------------------
# faces


@dataclass(frozen=True)
class Face:
    cone: Cone
    generator_subset: frozenset
    dim: int

    @property
    def rays(self) -> list[Vector]:
        return [self.cone.rays[i] for i in sorted(self.generator_subset)]

    def sort_key(self):
        return (self.dim, tuple(sorted(self.generator_subset)))

    def __repr__(self) -> str:
        return f"Face(dim={self.dim}, rays={sorted(self.generator_subset)})"


@dataclass(frozen=True)
class FaceLattice:
    cone: Cone
    faces: tuple[Face, ...]

    @cached_property
    def incidence(self) -> dict[Face, tuple[Face, ...]]:
        """Each face mapped to the faces containing it."""
        return {
            f: tuple(g for g in self.faces if f.generator_subset <= g.generator_subset)
            for f in self.faces
        }

    def by_dim(self, d: int) -> list[Face]:
        return [f for f in self.faces if f.dim == d]

    def __len__(self) -> int:
        return len(self.faces)


def _face_from_subset(K: Cone, subset) -> Face:
    subset = frozenset(subset)
    d = int_rank([K.rays[i] for i in subset]) if subset else 0
    return Face(K, subset, d)


def full_face(K: Cone) -> Face:
    return _face_from_subset(K, range(len(K.rays)))


def zero_face(K: Cone) -> Face:
    return Face(K, frozenset(), 0)


@lru_cache(maxsize=None)
def enumerate_faces(K: Cone) -> FaceLattice:
    if len(K.rays) > MAX_FACE_RAYS:
        raise BudgetError(f"{len(K.rays)} rays exceeds the face enumeration limit")
    facet_sets = []
    for n in K.facet_normals:
        facet_sets.append(frozenset(i for i, r in enumerate(K.rays) if dot(r, n) == 0))
    everything = frozenset(range(len(K.rays)))
    found = {everything}
    frontier = list(set(facet_sets))
    found.update(frontier)
    while frontier:
        nxt = []
        for s in frontier:
            for t in facet_sets:
                u = s & t
                if u not in found:
                    found.add(u)
                    nxt.append(u)
        frontier = nxt
    found.add(frozenset())
    faces = sorted((_face_from_subset(K, s) for s in found), key=Face.sort_key)
    return FaceLattice(K, tuple(faces))


def dual_face(theta: Face) -> Face:
    K = theta.cone
    Kd = K.dual
    rays = theta.rays
    subset = frozenset(j for j, n in enumerate(Kd.rays) if all(dot(r, n) == 0 for r in rays))
    return _face_from_subset(Kd, subset)


def face_normals(theta: Face) -> tuple[list[Vector], list[Vector]]:
    """Facet normals vanishing on theta, and the remaining facet normals."""
    on, off = [], []
    rays = theta.rays
    for n in theta.cone.facet_normals:
        (on if all(dot(r, n) == 0 for r in rays) else off).append(n)
    return on, off


# ---------------------------------------------------------------------------
# lattice points


@lru_cache(maxsize=64)
def _level_points(K: Cone, k: int) -> np.ndarray:
    n = K.ambient_rank
    if k == 0:
        return np.zeros((1, n), dtype=np.int64)
    deg = np.array(K.degree_vector, dtype=np.int64)
    pivots = [j for j in range(n) if abs(deg[j]) == 1]
    R = np.array(K.rays, dtype=np.int64)
    lo, hi = k * R.min(axis=0), k * R.max(axis=0)
    N = np.array(K.facet_normals, dtype=np.int64)
    if pivots:
        j = pivots[0]
        free = [i for i in range(n) if i != j]
    else:
        j = None
        free = list(range(n))
    chunks = []
    if not free:
        grid_iter = [np.zeros((1, 0), dtype=np.int64)]
    else:
        ranges = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in free]
        rest = ranges[1:]
        if rest:
            mesh = np.stack(np.meshgrid(*rest, indexing="ij"), axis=-1).reshape(-1, len(rest))
        else:
            mesh = np.zeros((1, 0), dtype=np.int64)
        grid_iter = (
            np.hstack([np.full((mesh.shape[0], 1), v, dtype=np.int64), mesh]) for v in ranges[0]
        )
    for block in grid_iter:
        X = np.zeros((block.shape[0], n), dtype=np.int64)
        X[:, free] = block
        if j is not None:
            partial = X @ deg
            X[:, j] = (k - partial) * deg[j]
        else:
            X = X[(X @ deg) == k]
        keep = np.all(X @ N.T >= 0, axis=1)
        chunks.append(X[keep])
    pts = np.vstack(chunks) if chunks else np.zeros((0, n), dtype=np.int64)
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    pts.setflags(write=False)
    return pts


def _on_face_mask(theta: Face, pts: np.ndarray) -> np.ndarray:
    on, _ = face_normals(theta)
    if not on:
        return np.ones(len(pts), dtype=bool)
    A = np.array(on, dtype=np.int64)
    return np.all(pts @ A.T == 0, axis=1)


def _interior_mask(theta: Face, pts: np.ndarray) -> np.ndarray:
    on, off = face_normals(theta)
    mask = _on_face_mask(theta, pts)
    if off:
        B = np.array(off, dtype=np.int64)
        mask &= np.all(pts @ B.T > 0, axis=1)
    return mask


def lattice_point_array(theta: Face, k: int) -> np.ndarray:
    if k < 0:
        raise ValidationError("level must be non-negative")
    pts = _level_points(theta.cone, k)
    if len(theta.generator_subset) == len(theta.cone.rays):
        return pts
    return pts[_on_face_mask(theta, pts)]


def interior_point_array(theta: Face, k: int) -> np.ndarray:
    if k < 0:
        raise ValidationError("level must be non-negative")
    pts = _level_points(theta.cone, k)
    if not theta.generator_subset:
        return pts if k == 0 else pts[:0]
    if k == 0:
        return pts[:0]
    return pts[_interior_mask(theta, pts)]


def lattice_points(theta: Face, k: int) -> list[Vector]:
    return [tuple(int(x) for x in row) for row in lattice_point_array(theta, k)]


def interior_lattice_points(theta: Face, k: int) -> list[Vector]:
    return [tuple(int(x) for x in row) for row in interior_point_array(theta, k)]


# ---------------------------------------------------------------------------
# reflexive pairs


@dataclass(frozen=True)
class GorensteinPair:
    """Dual pair (K, K*) with deg in K* side and deg* in K side."""

    K: Cone
    Kdual: Cone

    @cached_property
    def data(self):
        return check_reflexive_gorenstein(self.K, self.Kdual)

    @property
    def deg(self) -> Vector:
        return self.data[0]

    @property
    def deg_star(self) -> Vector:
        return self.data[1]

    @property
    def index(self) -> int:
        return self.data[2]

    @property
    def rank(self) -> int:
        return self.K.ambient_rank

    def swapped(self) -> "GorensteinPair":
        return GorensteinPair(self.Kdual, self.K)


def pair_from_polytope(delta: Polytope) -> GorensteinPair:
    """K is the cone over ``delta`` and K* the cone over its polar dual."""
    K = gorenstein_cone(delta)
    Kd = gorenstein_cone(polar_dual(delta))
    pair = GorensteinPair(K, Kd)
    pair.data
    return pair


def pair_from_cone(K: Cone) -> GorensteinPair:
    pair = GorensteinPair(K, K.dual)
    pair.data
    return pair


# ---------------------------------------------------------------------------
# presets

PRESETS = {
    "quintic": ((4, -1, -1, -1), (-1, 4, -1, -1), (-1, -1, 4, -1), (-1, -1, -1, 4), (-1, -1, -1, -1)),
    "elliptic": ((2, -1), (-1, 2), (-1, -1)),
}


def preset_polytope(name: str) -> Polytope:
    """Delta for the quintic threefold or the elliptic cubic (the polar simplex is the small one)."""
    try:
        return make_polytope(PRESETS[name])
    except KeyError:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def preset_pair(name: str) -> GorensteinPair:
    return pair_from_polytope(preset_polytope(name))
