"""R_1(theta, f) and the chiral-ring space W_{f,g} = sum over faces of R_1(theta,f) (x) R_1(theta*,g).

R_1(theta, f) is the image of the interior monomials of theta in the Artinian
quotient C[theta]/I_f.  Reports place R_1 of the zero face in degree 0, and
the (a, b) bigrading is the raw pair (.deg* degree on the theta side,
deg. degree on the theta* side); no Hodge-number relabelling is attempted.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import semigroup_ring as sr
from .errors import DegeneracyError, ValidationError
from .koszul_homology import linalg
from .koszul_homology.quotient import dual_rank_on, face_generators, quotient_data
from .koszul_homology.sparse import SparseMatrix
from .koszul_homology.wspace import BigradedDims
from .lattice_geometry import (
    Cone,
    Face,
    GorensteinPair,
    dual_face,
    enumerate_faces,
    full_face,
    interior_point_array,
    lattice_point_array,
)


@dataclass
class R1Space:
    face: Face
    graded_dims: list[int]
    representative_basis: list | None = None

    @property
    def total(self) -> int:
        return sum(self.graded_dims)

    def nonzero_degrees(self) -> list[tuple[int, int]]:
        return [(k, d) for k, d in enumerate(self.graded_dims) if d]


@dataclass
class FaceEntry:
    face: Face
    dual: Face
    r1_f: R1Space
    r1_g: R1Space

    @property
    def contribution(self) -> int:
        return self.r1_f.total * self.r1_g.total


@dataclass
class WTable:
    entries: list[FaceEntry]
    bigraded: BigradedDims = field(default_factory=BigradedDims)

    @property
    def total(self) -> int:
        return sum(e.contribution for e in self.entries)

    def by_dim(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for e in self.entries:
            out[e.face.dim] = out.get(e.face.dim, 0) + e.contribution
        return out

    def by_w(self) -> dict[int, int]:
        """Aggregate over a + b."""
        out: dict[int, int] = {}
        for (a, b), v in self.bigraded.items():
            out[a + b] = out.get(a + b, 0) + v
        return out

    def report(self) -> dict:
        return {
            "faces": [
                {
                    "dim": e.face.dim,
                    "rays": sorted(e.face.generator_subset),
                    "r1_f": e.r1_f.graded_dims,
                    "r1_g": e.r1_g.graded_dims,
                    "contribution": e.contribution,
                }
                for e in self.entries
            ],
            "bigraded": self.bigraded.as_list(),
            "total": self.total,
            "r1_zero_face_degree": 0,
        }

    def to_json(self) -> str:
        return json.dumps(self.report(), sort_keys=True, indent=2)


def _theta(K) -> Face:
    return full_face(K) if isinstance(K, Cone) else K


def _columns(theta: Face, k: int) -> np.ndarray:
    pts = interior_point_array(theta, k)
    if len(pts) == 0:
        return np.zeros(0, dtype=np.int64)
    cols = sr.point_index(theta, k).lookup(pts)
    if np.any(cols < 0):
        raise AssertionError("interior point missing from the level set")
    return cols


def r1_dims(theta: Face, f, kmax: int | None = None, mode: str = "modular", seed: int = 0,
            check: bool = True, representatives: bool = False) -> R1Space:
    """Graded dimensions of R_1(theta, f) in degrees 0..kmax (default dim theta)."""
    theta = _theta(theta)
    if theta.dim == 0:
        zero = tuple([0] * theta.cone.ambient_rank)
        return R1Space(theta, [1], [[zero]] if representatives else None)
    kmax = theta.dim if kmax is None else int(kmax)
    depth = max(kmax, theta.dim + 2) if check else kmax
    runs = quotient_data(theta, f, depth, mode, seed)
    if check and (runs[0].dims[theta.dim + 1] or runs[0].dims[theta.dim + 2]):
        raise DegeneracyError(f"coefficient function is degenerate on {theta!r}")
    dims = [0]
    reps: list = [[]]
    for k in range(1, kmax + 1):
        cols = _columns(theta, k)
        ranks = {dual_rank_on(run, k, cols) for run in runs}
        if len(ranks) != 1:
            exact = quotient_data(theta, f, depth, "exact", seed)[0]
            ranks = {dual_rank_on(exact, k, cols)}
        dims.append(ranks.pop())
        if representatives:
            reps.append(_representatives(theta, runs[0], k, cols) if dims[-1] else [])
    return R1Space(theta, dims, reps if representatives else None)


def _representatives(theta: Face, data, k: int, cols: np.ndarray) -> list:
    """Interior points whose images form a basis of R_1 in degree k (column selection)."""
    pts = lattice_point_array(theta, k)
    if data.field is None:
        D = data.duals[k]
        chosen: list[int] = []
        base = D.cols - data.dims[k]
        for c in cols:
            trial = chosen + [int(c)]
            E = SparseMatrix.build(len(trial), D.cols, np.arange(len(trial)), trial, np.ones(len(trial)))
            both = SparseMatrix.vstack([D, E]) if D.rows else E
            if linalg.rank_exact(both.to_scipy()) - base == len(trial):
                chosen.append(int(c))
        return [tuple(int(x) for x in pts[c]) for c in chosen]
    _, piv = linalg.rref_modp(data.duals[k][:, cols], data.field)
    return [tuple(int(x) for x in pts[cols[c]]) for c in piv]


def w_table(K, f, g, mode: str = "modular", seed: int = 0, jobs: int = 1, representatives: bool = False) -> WTable:
    """Sum over the faces theta of K of R_1(theta, f) (x) R_1(theta*, g)."""
    if isinstance(K, GorensteinPair):
        K = K.K
    faces = enumerate_faces(K).faces

    def one(theta: Face) -> FaceEntry:
        dual = dual_face(theta)
        try:
            rf = r1_dims(theta, f, mode=mode, seed=seed, representatives=representatives)
            rg = r1_dims(dual, g, mode=mode, seed=seed, representatives=representatives)
        except DegeneracyError as exc:
            raise DegeneracyError(f"{exc} (face of dimension {theta.dim})") from exc
        return FaceEntry(theta, dual, rf, rg)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(one, faces))
    else:
        entries = [one(t) for t in faces]
    table = WTable(entries)
    for e in entries:
        for a, da in e.r1_f.nonzero_degrees():
            for b, db in e.r1_g.nonzero_degrees():
                table.bigraded.add((a, b), da * db)
    return table


# ---------------------------------------------------------------------------
# the quintic diagonal ring


@dataclass
class DiagonalRing:
    discriminant: Fraction | None
    nondegenerate: bool
    images: list[bool]  # t^j nonzero in R_1, j = 0..4
    interior_module_top: bool  # [5 n0] nonzero in C[K*°]/I_g C[K*°]
    r1_dims: list[int]

    def report(self) -> dict:
        return {
            "discriminant": None if self.discriminant is None else str(self.discriminant),
            "nondegenerate": self.nondegenerate,
            "t_power_nonzero": self.images,
            "socle_of_interior_module": self.interior_module_top,
            "r1_dims": self.r1_dims,
            "convention": "t^j is the image of the monomial (j+1)*n0",
        }


def diagonal_points(Kdual: Cone) -> tuple[tuple, list[tuple]]:
    """(n0, [n1..n5]): the interior point and the vertices of the level-1 slice of K*."""
    theta = full_face(Kdual)
    pts = [tuple(int(x) for x in p) for p in lattice_point_array(theta, 1)]
    inner = [tuple(int(x) for x in p) for p in interior_point_array(theta, 1)]
    if len(pts) != 6 or len(inner) != 1:
        raise ValidationError("expected six points of Delta* with one interior point")
    n0 = inner[0]
    return n0, [p for p in pts if p != n0]


def discriminant(g, Kdual: Cone) -> Fraction | None:
    """1 + g0^5 / (5^5 g1...g5); None if some vertex coefficient vanishes."""
    n0, others = diagonal_points(Kdual)
    prod = Fraction(5**5)
    for n in others:
        prod *= g(n)
    if prod == 0:
        return None
    return 1 + Fraction(g(n0)) ** 5 / prod


def quintic_diagonal_ring(g, Kdual: Cone, mode: str = "modular", seed: int = 0) -> DiagonalRing:
    """Images of [k n0], k = 1..5, in R_1(K*, g); t^j is the image of (j+1) n0."""
    from .koszul_homology.wspace import is_nondegenerate

    theta = full_face(Kdual)
    n0, _ = diagonal_points(Kdual)
    disc = discriminant(g, Kdual)
    if not is_nondegenerate(theta, g, mode, seed):
        raise DegeneracyError(f"g is degenerate (discriminant {disc})")
    r1 = r1_dims(theta, g, kmax=5, mode=mode, seed=seed)
    runs = quotient_data(theta, g, 5, mode, seed)
    images = []
    for k in range(1, 6):
        col = sr.point_index(theta, k).lookup(np.array([[c * k for c in n0]], dtype=np.int64))
        images.append(all(dual_rank_on(run, k, col) == 1 for run in runs))
    return DiagonalRing(disc, True, images, _interior_socle(theta, g, n0, mode, seed), r1.graded_dims[1:])


def _interior_socle(theta: Face, g, n0, mode: str, seed: int) -> bool:
    """Whether [5 n0] survives in C[K*°] / I_g C[K*°] (degree 5)."""
    gens = face_generators(theta, g)
    src = interior_point_array(theta, 4)
    src_idx = sr.point_index(theta, 4).lookup(src)
    tgt_cols = _columns(theta, 5)
    A = sr.stacked_multiplication(gens, theta, 4, None).to_scipy().tocsr()
    n_src = len(lattice_point_array(theta, 4))
    rows = np.concatenate([src_idx + i * n_src for i in range(len(gens))])
    sub = A[rows][:, tgt_cols]
    target = sr.point_index(theta, 5).lookup(np.array([[5 * c for c in n0]], dtype=np.int64))[0]
    pos = int(np.nonzero(tgt_cols == target)[0][0])
    e = np.zeros((1, len(tgt_cols)), dtype=np.int64)
    e[0, pos] = 1
    from scipy.sparse import csr_matrix, vstack

    both = vstack([sub, csr_matrix(e)]).tocsr()
    if mode == "exact":
        return linalg.rank_exact(both) > linalg.rank_exact(sub)
    primes = linalg.random_primes(seed + 17, 3)
    return all(linalg.rank_sparse_modp(both, p, seed) > linalg.rank_sparse_modp(sub, p, seed) for p in primes)


__all__ = [
    "DiagonalRing",
    "FaceEntry",
    "R1Space",
    "WTable",
    "diagonal_points",
    "discriminant",
    "quintic_diagonal_ring",
    "r1_dims",
    "w_table",
]
