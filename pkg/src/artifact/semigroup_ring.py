"""Graded pieces of C[K] and of the partial rings C[K]^Phi.

Monomials of degree k are the lattice points of a face at level k, ordered
lexicographically.  Multiplication matrices use the row convention: row =
source monomial, column = target monomial.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations
from math import factorial, gcd, lcm

import flint
import numpy as np

from .errors import ValidationError
from .koszul_homology.sparse import SparseMatrix
from .lattice_geometry import (
    Cone,
    Face,
    Vector,
    dot,
    int_rank,
    lattice_point_array,
    make_polytope,
)

SAMPLE_RANGE = 1 << 20


# ---------------------------------------------------------------------------
# coefficient functions


@dataclass(frozen=True)
class CoefficientFunction:
    points: tuple[Vector, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise ValidationError("points and values differ in length")
        if len(set(self.points)) != len(self.points):
            raise ValidationError("duplicate support point")

    @cached_property
    def mapping(self) -> dict[Vector, Fraction]:
        return dict(zip(self.points, self.values))

    def __call__(self, m) -> Fraction:
        return self.mapping.get(tuple(m), Fraction(0))

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def denominator(self) -> int:
        return reduce(lcm, (v.denominator for v in self.values), 1)

    def integer_values(self) -> tuple[int, ...]:
        """Values scaled by the common denominator (a harmless global rescaling)."""
        den = self.denominator()
        return tuple(int(v * den) for v in self.values)

    def with_values(self, values) -> "CoefficientFunction":
        return CoefficientFunction(self.points, tuple(Fraction(v) for v in values))

    def canonical(self) -> str:
        return ";".join(f"{','.join(map(str, p))}:{v}" for p, v in sorted(self.mapping.items()))


def _as_points(points) -> tuple[Vector, ...]:
    return tuple(tuple(int(x) for x in p) for p in points)


def sample_coefficients(points, seed: int) -> CoefficientFunction:
    """Seeded integer values in [1, 2**20], keyed by the point itself."""
    pts = _as_points(points)
    if not pts:
        raise ValidationError("empty support")
    vals = []
    for p in pts:
        h = hashlib.sha256(f"{int(seed)}|{','.join(map(str, p))}".encode()).digest()
        vals.append(Fraction(1 + int.from_bytes(h[:8], "big") % SAMPLE_RANGE))
    return CoefficientFunction(pts, tuple(vals))


def fermat_coefficients(points) -> CoefficientFunction:
    pts = _as_points(points)
    verts = set(make_polytope(pts).vertices)
    return CoefficientFunction(pts, tuple(Fraction(int(p in verts)) for p in pts))


def zero_coefficients(points) -> CoefficientFunction:
    pts = _as_points(points)
    return CoefficientFunction(pts, tuple(Fraction(0) for _ in pts))


def format_coefficients(f: CoefficientFunction, drop_last: bool = False) -> str:
    lines = []
    for p, v in zip(f.points, f.values):
        coords = p[:-1] if drop_last else p
        lines.append(f"{' '.join(map(str, coords))} : {v.numerator}/{v.denominator}")
    return "\n".join(lines) + "\n"


def parse_coefficients(text: str, points) -> CoefficientFunction:
    """Parse ``c1 ... cd : p/q`` lines against the expected support.

    Lines with one coordinate fewer than the support points are lifted to level 1
    by appending a trailing 1 (polytope coordinates for a cone over a polytope).
    """
    pts = _as_points(points)
    n = len(pts[0])
    lifted = all(p[-1] == 1 for p in pts)
    values: dict[Vector, Fraction] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValidationError(f"line {lineno}: expected 'coords : value'")
        left, right = line.split(":", 1)
        try:
            coords = tuple(int(x) for x in left.split())
            val = Fraction(right.strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"line {lineno}: cannot parse entry") from None
        if len(coords) == n - 1 and lifted:
            coords = coords + (1,)
        if len(coords) != n:
            raise ValidationError(f"line {lineno}: expected {n} coordinates")
        if coords not in set(pts):
            raise ValidationError(f"line {lineno}: point {coords} is not in the support")
        if coords in values:
            raise ValidationError(f"line {lineno}: duplicate point {coords}")
        values[coords] = val
    missing = [p for p in pts if p not in values]
    if missing:
        raise ValidationError(f"coefficient file misses {len(missing)} support points, e.g. {missing[0]}")
    return CoefficientFunction(pts, tuple(values[p] for p in pts))


def read_coefficients(path, points) -> CoefficientFunction:
    with open(path, encoding="utf-8") as fh:
        return parse_coefficients(fh.read(), points)


# ---------------------------------------------------------------------------
# graded elements


@dataclass(frozen=True)
class GradedElement:
    degree: int
    terms: dict = field(hash=False)

    def __add__(self, other: "GradedElement") -> "GradedElement":
        if other.degree != self.degree:
            raise ValidationError("adding elements of different degree")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return GradedElement(self.degree, {m: c for m, c in out.items() if c != 0})

    def scale(self, c) -> "GradedElement":
        c = Fraction(c)
        if c == 0:
            return GradedElement(self.degree, {})
        return GradedElement(self.degree, {m: c * v for m, v in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def restrict(self, points) -> "GradedElement":
        keep = set(map(tuple, points))
        return GradedElement(self.degree, {m: c for m, c in self.terms.items() if m in keep})


def monomial(m) -> GradedElement:
    return GradedElement(1, {tuple(int(x) for x in m): Fraction(1)})


def z_element(f: CoefficientFunction, n) -> GradedElement:
    terms = {}
    for m, v in zip(f.points, f.values):
        c = v * dot(m, n)
        if c != 0:
            terms[m] = c
    return GradedElement(1, terms)


# ---------------------------------------------------------------------------
# point lookup


class PointIndex:
    """Vectorised position lookup in a lexicographically sorted point array."""

    def __init__(self, pts: np.ndarray):
        self.pts = pts
        n = pts.shape[1]
        if len(pts):
            self.lo = pts.min(axis=0)
            self.hi = pts.max(axis=0)
        else:
            self.lo = self.hi = np.zeros(n, dtype=np.int64)
        radix = self.hi - self.lo + 1
        mult = np.ones(n, dtype=np.int64)
        for i in range(n - 2, -1, -1):
            mult[i] = mult[i + 1] * radix[i + 1]
        self.mult = mult
        self.keys = (pts - self.lo) @ mult if len(pts) else np.zeros(0, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.pts)

    def lookup(self, Q: np.ndarray) -> np.ndarray:
        """Row index of each query point, or -1 when absent."""
        if len(self.pts) == 0 or len(Q) == 0:
            return np.full(len(Q), -1, dtype=np.int64)
        inside = np.all((Q >= self.lo) & (Q <= self.hi), axis=1)
        keys = (np.where(inside[:, None], Q, self.lo) - self.lo) @ self.mult
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, len(self.keys) - 1)
        found = inside & (self.keys[pos] == keys)
        return np.where(found, pos, -1)


_INDEX_CACHE: dict = {}


def point_index(theta: Face, k: int) -> PointIndex:
    key = (theta, k)
    idx = _INDEX_CACHE.get(key)
    if idx is None:
        if len(_INDEX_CACHE) > 256:
            _INDEX_CACHE.clear()
        idx = PointIndex(lattice_point_array(theta, k))
        _INDEX_CACHE[key] = idx
    return idx


# ---------------------------------------------------------------------------
# triangulations and the partial product


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Regular subdivision of a level-1 point set; cells are index tuples."""

    points: tuple[Vector, ...]
    heights: tuple[Fraction, ...]
    cells: tuple[tuple[int, ...], ...]
    degree_vector: Vector

    @cached_property
    def _normals(self) -> tuple[np.ndarray, np.ndarray]:
        rows, owner = [], []
        for c, cell in enumerate(self.cells):
            cone = Cone(tuple(self.points[i] for i in cell), self.degree_vector)
            for nrm in cone.facet_normals:
                rows.append(nrm)
                owner.append(c)
        return np.array(rows, dtype=np.int64).reshape(-1, len(self.degree_vector)), np.array(owner)

    def membership(self, X: np.ndarray) -> np.ndarray:
        """Boolean (len(X), #cells): closed-cone membership of each point."""
        X = np.asarray(X, dtype=np.int64).reshape(-1, len(self.degree_vector))
        N, owner = self._normals
        out = np.ones((len(X), len(self.cells)), dtype=bool)
        if len(N) == 0:
            return out
        ok = (X @ N.T) >= 0
        for c in range(len(self.cells)):
            out[:, c] = np.all(ok[:, owner == c], axis=1)
        return out

    def same_cell(self, x, y) -> bool:
        mx, my = self.membership(np.array([x])), self.membership(np.array([y]))
        return bool(np.any(mx & my))

    def is_simplicial(self) -> bool:
        return all(len(c) == len(self.degree_vector) for c in self.cells)

    @cached_property
    def _linear_pieces(self) -> list[list[Fraction]]:
        pieces = []
        for cell in self.cells:
            rows = [list(self.points[i]) for i in cell]
            rhs = [self.heights[i] for i in cell]
            A = flint.fmpq_mat(rows)
            b = flint.fmpq_mat([[flint.fmpq(r.numerator, r.denominator)] for r in rhs])
            AtA = A.transpose() * A
            sol = AtA.solve(A.transpose() * b)
            pieces.append([Fraction(int(sol[i, 0].p), int(sol[i, 0].q)) for i in range(A.ncols())])
        return pieces

    def h_value(self, x) -> Fraction:
        """Concave piecewise-linear function with h(x+y) >= h(x)+h(y) (equality iff same cell).

        It is minus the lower envelope of the lifted heights.
        """
        return -max(sum((c * int(v) for c, v in zip(piece, x)), Fraction(0)) for piece in self._linear_pieces)

    def canonical(self) -> str:
        return ";".join(",".join(map(str, c)) for c in self.cells)


def _affine_coords(pts: np.ndarray) -> np.ndarray:
    D = pts - pts[0]
    d = int_rank(D.tolist()) if len(pts) > 1 else 0
    cols: list[int] = []
    for j in range(D.shape[1]):
        if int_rank(D[:, cols + [j]].tolist()) > len(cols):
            cols.append(j)
        if len(cols) == d:
            break
    return D[:, cols]


def _lower_cells(Y: np.ndarray, H: list[int]) -> list[tuple[int, ...]] | None:
    """Exact lower faces of the lifted points (Y, H); None when the lift is flat."""
    N, d = Y.shape
    Hn = np.array(H, dtype=object)
    lift = np.hstack([Y.astype(object), Hn[:, None], np.ones((N, 1), dtype=object)])
    if int_rank(lift.tolist()) < d + 2:
        return None
    if N <= 14:
        candidates = combinations(range(N), d + 1)
    else:
        from scipy.spatial import ConvexHull

        P = np.hstack([Y.astype(float), np.array([float(h) for h in H])[:, None]])
        scale = max(1.0, float(np.abs(P[:, -1]).max()))
        P[:, -1] /= scale
        hull = ConvexHull(P, qhull_options="QJ Pp")
        candidates = {tuple(sorted(int(i) for i in s)) for s in hull.simplices}
    cells = set()
    Yo = Y.astype(object)
    for sub in candidates:
        rows = [[int(x) for x in Y[i]] + [1] for i in sub]
        if int_rank(rows) < d + 1:
            continue
        A = flint.fmpq_mat(rows)
        b = flint.fmpq_mat([[int(H[i])] for i in sub])
        sol = A.solve(b)
        den = reduce(lcm, (int(sol[i, 0].q) for i in range(d + 1)), 1)
        coef = [int(sol[i, 0] * den) for i in range(d + 1)]
        vals = den * Hn - (Yo @ np.array(coef[:d], dtype=object) + coef[d])
        if any(v < 0 for v in vals):
            continue
        cells.add(tuple(i for i in range(N) if vals[i] == 0))
    return sorted(cells)


def _volume(Y: np.ndarray) -> float:
    d = Y.shape[1]
    if d == 0:
        return 1.0
    if d == 1:
        return float(Y.max() - Y.min())
    from scipy.spatial import ConvexHull

    return float(ConvexHull(Y.astype(float)).volume) * factorial(d)


def _check_cover(Y: np.ndarray, cells) -> None:
    total = _volume(Y)
    parts = sum(_volume(Y[list(c)]) for c in cells)
    if abs(total - parts) > 1e-6 * max(1.0, total):
        raise ValidationError("triangulation cells do not cover the polytope")


def regular_triangulation(points, heights, perturb: bool = True, degree_vector=None) -> Triangulation:
    """Lower faces of the height-lifted points.

    With ``perturb`` non-simplicial cells are refined by a small deterministic
    perturbation of the heights (fixed pseudo-random integer weights scaled below
    the smallest positive height gap), so the result is a regular triangulation
    refining the subdivision given by ``heights``.
    """
    pts = _as_points(points)
    if len(pts) != len(heights):
        raise ValidationError("one height per point required")
    hs = tuple(Fraction(h) for h in heights)
    arr = np.array(pts, dtype=np.int64)
    n = arr.shape[1]
    if degree_vector is None:
        degree_vector = (0,) * (n - 1) + (1,)
    degree_vector = tuple(int(x) for x in degree_vector)
    if any(dot(p, degree_vector) != 1 for p in pts):
        raise ValidationError("triangulated points must lie at level 1")
    Y = _affine_coords(arr)
    d = Y.shape[1]

    def cells_for(hv):
        den = reduce(lcm, (h.denominator for h in hv), 1)
        H = [int(h * den) for h in hv]
        c = _lower_cells(Y, H)
        return [tuple(range(len(pts)))] if c is None else c

    cells = cells_for(hs)
    if perturb and any(len(c) > d + 1 for c in cells):
        rng = np.random.default_rng([len(pts), abs(hash(pts)) % (1 << 32)])
        weights = [int(w) for w in rng.integers(1, 1 << 12, size=len(pts))]
        gap = _min_gap(Y, hs, cells)
        eps = gap / (1 << 16)
        for _ in range(24):
            trial = tuple(h + eps * w for h, w in zip(hs, weights))
            new = cells_for(trial)
            if all(len(c) == d + 1 for c in new) and all(
                any(set(c) <= set(o) for o in cells) for c in new
            ):
                cells, hs = new, trial
                break
            eps /= 16
        else:
            raise ValidationError("heights could not be perturbed into a triangulation")
    _check_cover(Y, cells)
    return Triangulation(pts, hs, tuple(tuple(c) for c in cells), degree_vector)


def _min_gap(Y: np.ndarray, hs, cells) -> Fraction:
    """Smallest positive amount by which a point sits above a cell's supporting plane."""
    gap = None
    for cell in cells:
        sub = list(cell)
        rows = [[int(x) for x in Y[i]] + [1] for i in sub]
        A = flint.fmpq_mat(rows)
        b = flint.fmpq_mat([[flint.fmpq(hs[i].numerator, hs[i].denominator)] for i in sub])
        At = A.transpose()
        sol = (At * A).solve(At * b)
        coef = [Fraction(int(sol[i, 0].p), int(sol[i, 0].q)) for i in range(A.ncols())]
        for p in range(len(hs)):
            val = hs[p] - (sum((c * int(y) for c, y in zip(coef, Y[p])), Fraction(0)) + coef[-1])
            if val > 0 and (gap is None or val < gap):
                gap = val
    return gap if gap is not None else Fraction(1)


def trivial_subdivision(points, degree_vector=None) -> Triangulation:
    """One cell holding every point: the partial product is then the ordinary one."""
    return regular_triangulation(points, [0] * len(points), perturb=False, degree_vector=degree_vector)


def pulling_heights(points, apex, seed: int = 0, spread: int = 1 << 10) -> list[Fraction]:
    """Height 0 at ``apex``, generic heights just above 1 elsewhere."""
    pts = _as_points(points)
    apex = tuple(apex)
    rng = np.random.default_rng([0xA9E, seed])
    r = rng.integers(1, spread, size=len(pts))
    return [Fraction(0) if p == apex else 1 + Fraction(int(x), spread * 64) for p, x in zip(pts, r)]


def pulling_triangulation(points, apex, seed: int = 0, degree_vector=None) -> Triangulation:
    """Regular triangulation whose maximal cells all contain ``apex``."""
    pts = _as_points(points)
    T = regular_triangulation(pts, pulling_heights(pts, apex, seed), degree_vector=degree_vector)
    a = pts.index(tuple(apex))
    if not all(a in c for c in T.cells):
        raise ValidationError("pulling heights failed to produce a star triangulation")
    return T


def random_triangulation(points, seed: int, degree_vector=None) -> Triangulation:
    rng = np.random.default_rng([0x7A1, seed])
    heights = [Fraction(int(x)) for x in rng.integers(0, 1 << 16, size=len(points))]
    return regular_triangulation(points, heights, degree_vector=degree_vector)


# ---------------------------------------------------------------------------
# multiplication matrices


def _element_integer_terms(e: GradedElement) -> list[tuple[Vector, int]]:
    den = reduce(lcm, (c.denominator for c in e.terms.values()), 1)
    return [(m, int(c * den)) for m, c in sorted(e.terms.items())]


def shift_table(theta: Face, k: int, shifts, phi: Triangulation | None = None):
    """For each degree-1 point s: target column of (source + s), -1 when the product vanishes."""
    src = lattice_point_array(theta, k)
    tgt = point_index(theta, k + 1)
    shifts = [tuple(s) for s in shifts]
    table = {}
    src_mask = phi.membership(src) if phi is not None and len(src) else None
    for s in shifts:
        cols = tgt.lookup(src + np.array(s, dtype=np.int64))
        if phi is not None and k > 0:
            smask = phi.membership(np.array([s]))[0]
            cols = np.where(np.any(src_mask & smask, axis=1), cols, -1)
        table[s] = cols
    return table


def multiplication_matrix(e: GradedElement, theta: Face, k: int, phi: Triangulation | None = None) -> SparseMatrix:
    """Matrix of multiplication by ``e`` from degree k to degree k+1 on ``theta``.

    Rational terms are scaled by their common denominator, which changes no
    image or rank.  With ``phi`` the product [x][s] survives only when x and s
    lie in a common closed cell.
    """
    if e.degree != 1:
        raise ValidationError("multiplication matrices are built for degree-1 elements")
    if k < 0:
        raise ValidationError("negative degree")
    terms = _element_integer_terms(e)
    on_face = point_index(theta, 1)
    if terms:
        found = on_face.lookup(np.array([m for m, _ in terms], dtype=np.int64))
        if np.any(found < 0):
            raise ValidationError("element is not supported on the face")
    return stacked_multiplication([e], theta, k, phi)


def stacked_multiplication(elements, theta: Face, k: int, phi: Triangulation | None = None) -> SparseMatrix:
    """Vertical stack of multiplication matrices of several degree-1 elements."""
    n_src = len(lattice_point_array(theta, k))
    n_tgt = len(point_index(theta, k + 1))
    all_terms = [_element_integer_terms(e) for e in elements]
    support = sorted({m for terms in all_terms for m, _ in terms})
    table = shift_table(theta, k, support, phi)
    rr, cc, dd = [], [], []
    base = np.arange(n_src, dtype=np.int64)
    for b, terms in enumerate(all_terms):
        for m, c in terms:
            cols = table[m]
            ok = cols >= 0
            rr.append(base[ok] + b * n_src)
            cc.append(cols[ok])
            dd.append(np.full(int(ok.sum()), c, dtype=np.int64))
    if not rr:
        return SparseMatrix.zeros(n_src * len(elements), n_tgt)
    return SparseMatrix.build(
        n_src * len(elements), n_tgt, np.concatenate(rr), np.concatenate(cc), np.concatenate(dd)
    )


def partial_product(x, y, phi: Triangulation | None):
    """Product of two monomials in C[K]^phi: the sum, or None when it vanishes."""
    if phi is not None and not phi.same_cell(x, y):
        return None
    return tuple(a + b for a, b in zip(x, y))
