"""The complex V = wedge(N_C) (x) C[L] and its cohomology.

C[L] has basis [m (+) n] with m in K, n in K* and m.n = 0.  The differential is
    d = sum_m f(m) contr(m) (x) [m]  +  sum_n g(n) (n wedge .) (x) [n],
where a product leaving L is zero.  With a = m.deg*, b = deg.n and p the
exterior degree, the f-term moves (a, p) by (+1, -1) and the g-term moves
(b, p) by (+1, +1).  So q = a - b + p is conserved and w = a + b goes up by
one; every (q, w) slice is finite.

Both terms can be rescaled by nonzero constants without changing any
cohomology dimension (conjugate by lambda^a or lambda^b), which is how
rational coefficients and rational exterior bases are cleared to integers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import combinations
from math import lcm

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import semigroup_ring as sr
from .errors import BudgetError, DegeneracyError, ValidationError
from .koszul_homology.linalg import block_rank
from .koszul_homology.quotient import rank as _rank
from .koszul_homology.sparse import SparseMatrix
from .koszul_homology.wspace import BigradedDims, is_nondegenerate
from .lattice_geometry import GorensteinPair, Vector, dot, full_face, lattice_point_array

log = logging.getLogger(__name__)

SLICE_BUDGET = 9000
SMALL_BLOCK = 48
NNZ_BUDGET = 40_000_000


@dataclass(frozen=True)
class PairedMonomial:
    m: Vector
    n: Vector


@dataclass(frozen=True)
class FanData:
    """A fan refining the face fan of Delta*, from a triangulation of its points."""

    triangulation: sr.Triangulation
    label: str

    def same_cone(self, X: np.ndarray, n) -> np.ndarray:
        """For each row x of X: do x and n lie in a common cone?"""
        if len(X) == 0:
            return np.zeros(0, dtype=bool)
        mx = self.triangulation.membership(X)
        mn = self.triangulation.membership(np.array([n]))[0]
        return np.any(mx & mn, axis=1)


def fan_from_heights(pair: GorensteinPair, heights, label: str = "heights") -> FanData:
    pts = [tuple(int(x) for x in p) for p in lattice_point_array(full_face(pair.Kdual), 1)]
    tri = sr.regular_triangulation(pts, heights, degree_vector=pair.Kdual.degree_vector)
    return FanData(tri, label)


def random_fan(pair: GorensteinPair, seed: int) -> FanData:
    pts = [tuple(int(x) for x in p) for p in lattice_point_array(full_face(pair.Kdual), 1)]
    tri = sr.random_triangulation(pts, seed, degree_vector=pair.Kdual.degree_vector)
    return FanData(tri, f"random:{seed}")


def face_fan(pair: GorensteinPair) -> FanData:
    """Cones over the facets of Delta* (a triangulation that uses only the vertices and the origin ray)."""
    pts = [tuple(int(x) for x in p) for p in lattice_point_array(full_face(pair.Kdual), 1)]
    rays = set(pair.Kdual.rays)
    heights = [0 if p in rays else 1 for p in pts]
    tri = sr.regular_triangulation(pts, heights, perturb=False, degree_vector=pair.Kdual.degree_vector)
    return FanData(tri, "face-fan")


def parse_heights(text: str, pair: GorensteinPair) -> list[Fraction]:
    """One line per lattice point of Delta*: coordinates (level-1 or without the last 1), then a height."""
    pts = [tuple(int(x) for x in p) for p in lattice_point_array(full_face(pair.Kdual), 1)]
    table = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(":", " ").split()
        try:
            coords = tuple(int(x) for x in parts[:-1])
            h = Fraction(parts[-1])
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"line {lineno}: cannot parse {raw!r}") from exc
        if len(coords) == pair.rank - 1:
            coords = coords + (1,)
        if coords not in pts:
            raise ValidationError(f"line {lineno}: {coords} is not a lattice point of Delta*")
        table[coords] = h
    missing = [p for p in pts if p not in table]
    if missing:
        raise ValidationError(f"no height for {len(missing)} lattice points, e.g. {missing[0]}")
    return [table[p] for p in pts]


# ---------------------------------------------------------------------------
# the basis of C[L]


@lru_cache(maxsize=256)
def _L_arrays(pair: GorensteinPair, a: int, b: int):
    """(I, J): indices into the level-a points of K and level-b points of K* with m.n = 0."""
    Ma = lattice_point_array(full_face(pair.K), a)
    Nb = lattice_point_array(full_face(pair.Kdual), b)
    if len(Ma) == 0 or len(Nb) == 0:
        e = np.zeros(0, dtype=np.int64)
        return e, e
    I, J = np.nonzero((Ma @ Nb.T) == 0)
    return I.astype(np.int64), J.astype(np.int64)


def build_L_basis(pair: GorensteinPair, a: int, b: int) -> list[PairedMonomial]:
    if a < 0 or b < 0:
        raise ValidationError("levels must be non-negative")
    Ma = lattice_point_array(full_face(pair.K), a)
    Nb = lattice_point_array(full_face(pair.Kdual), b)
    I, J = _L_arrays(pair, a, b)
    return [PairedMonomial(tuple(int(x) for x in Ma[i]), tuple(int(x) for x in Nb[j])) for i, j in zip(I, J)]


class _LIndex:
    """Position of a pair (i, j) inside the L(a, b) basis."""

    def __init__(self, pair, a, b):
        self.I, self.J = _L_arrays(pair, a, b)
        self.nb = max(len(lattice_point_array(full_face(pair.Kdual), b)), 1)
        self.keys = self.I * self.nb + self.J

    def __len__(self):
        return len(self.I)

    def lookup(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        if len(self.keys) == 0:
            return np.full(len(i), -1, dtype=np.int64)
        k = i * self.nb + j
        pos = np.minimum(np.searchsorted(self.keys, k), len(self.keys) - 1)
        return np.where((i >= 0) & (j >= 0) & (self.keys[pos] == k), pos, -1)


# ---------------------------------------------------------------------------
# chain slices


@dataclass
class ChainSlice:
    q: int
    w: int
    blocks: list  # (p, S, a, b, offset, size)
    dim: int

    def block_offsets(self) -> dict:
        return {(S, a): off for _, S, a, _, off, _ in self.blocks}


def chain_slice(pair: GorensteinPair, q: int, w: int) -> ChainSlice:
    r = pair.rank
    blocks = []
    off = 0
    for p in range(r + 1):
        if (w + q - p) % 2:
            continue
        a = (w + q - p) // 2
        b = w - a
        if a < 0 or b < 0:
            continue
        n = len(_L_arrays(pair, a, b)[0])
        if n == 0:
            continue
        for S in combinations(range(r), p):
            blocks.append((p, S, a, b, off, n))
            off += n
    return ChainSlice(q, w, blocks, off)


@dataclass
class _Differential:
    """Integer data of d: exterior basis, scaled coefficient tables."""

    pair: GorensteinPair
    basis: np.ndarray  # rows: basis vectors of N (integers)
    f_terms: list  # (m, coefficient of contr(m) on e_k) as (vector, int array over k)
    g_terms: list  # (n, coordinates of n in the basis scaled) as (vector, int array over k)
    sigma: FanData | None


def _lcm_den(values) -> int:
    return reduce(lcm, (Fraction(v).denominator for v in values), 1)


def make_differential(pair: GorensteinPair, f, g, basis=None, sigma: FanData | None = None) -> _Differential:
    r = pair.rank
    B = np.eye(r, dtype=np.int64) if basis is None else np.array(basis, dtype=np.int64)
    if B.shape != (r, r):
        raise ValidationError("exterior basis must be a square matrix of full rank")
    import flint

    Bq = flint.fmpq_mat([[int(x) for x in row] for row in B.tolist()])
    if Bq.rank() != r:
        raise ValidationError("exterior basis is singular")
    Binv = Bq.inv()
    fs = [(m, Fraction(c)) for m, c in zip(f.points, f.values) if c != 0]
    gs = [(n, Fraction(c)) for n, c in zip(g.points, g.values) if c != 0]
    f_scale = _lcm_den(c for _, c in fs)
    f_terms = []
    for m, c in fs:
        pair_k = B @ np.array(m, dtype=np.int64)  # m . b_k
        f_terms.append((m, (int(c * f_scale) * pair_k).astype(np.int64)))
    coords = []
    for n, c in gs:
        # n = sum_k c_k b_k, i.e. c = n B^{-1}
        row = flint.fmpq_mat([[int(x) for x in n]]) * Binv
        coords.append([c * Fraction(int(row[0, k].p), int(row[0, k].q)) for k in range(r)])
    g_scale = _lcm_den(x for row in coords for x in row)
    g_terms = [(n, np.array([int(x * g_scale) for x in row], dtype=np.int64)) for (n, _), row in zip(gs, coords)]
    return _Differential(pair, B, f_terms, g_terms, sigma)


def d_matrix(D: _Differential, src: ChainSlice, tgt: ChainSlice) -> SparseMatrix:
    """Matrix of d from ``src`` to ``tgt`` (rows = source basis, columns = target basis)."""
    if src.q != tgt.q or tgt.w != src.w + 1:
        raise ValidationError("slice mismatch: need the same q and w(to) = w(from) + 1")
    pair = D.pair
    tK, tS = full_face(pair.K), full_face(pair.Kdual)
    toff = tgt.block_offsets()
    rows, cols, vals = [], [], []
    for p, S, a, b, off, n in src.blocks:
        I, J = _L_arrays(pair, a, b)
        Ma = lattice_point_array(tK, a)
        Nb = lattice_point_array(tS, b)
        local = np.arange(n, dtype=np.int64)
        # f-term: contr(m) (x) [m], landing in (a+1, b)
        if p > 0:
            idx_next = sr.point_index(tK, a + 1)
            Lt = _LIndex(pair, a + 1, b)
            for m, coef in D.f_terms:
                mv = np.array(m, dtype=np.int64)
                ok = (Nb[J] @ mv) == 0 if b > 0 else np.ones(n, dtype=bool)
                i2 = idx_next.lookup(Ma[I] + mv)
                pos = Lt.lookup(np.where(ok, i2, -1), J)
                good = pos >= 0
                if not good.any():
                    continue
                for t, k in enumerate(S):
                    c = int(coef[k])
                    if c == 0:
                        continue
                    rest = S[:t] + S[t + 1 :]
                    base = toff.get((rest, a + 1))
                    if base is None:
                        continue
                    sign = -1 if t % 2 else 1
                    rows.append(off + local[good])
                    cols.append(base + pos[good])
                    vals.append(np.full(int(good.sum()), sign * c, dtype=np.int64))
        # g-term: (n wedge) (x) [n], landing in (a, b+1)
        if p < pair.rank:
            idx_next = sr.point_index(tS, b + 1)
            Lt = _LIndex(pair, a, b + 1)
            for nvec, coord in D.g_terms:
                nv = np.array(nvec, dtype=np.int64)
                ok = (Ma[I] @ nv) == 0
                if D.sigma is not None and b > 0:
                    ok &= D.sigma.same_cone(Nb[J], nvec)
                j2 = idx_next.lookup(Nb[J] + nv)
                pos = Lt.lookup(I, np.where(ok, j2, -1))
                good = pos >= 0
                if not good.any():
                    continue
                for k in range(pair.rank):
                    c = int(coord[k])
                    if c == 0 or k in S:
                        continue
                    new = tuple(sorted(S + (k,)))
                    sign = -1 if sum(1 for s in S if s < k) % 2 else 1
                    base = toff.get((new, a))
                    if base is None:
                        continue
                    rows.append(off + local[good])
                    cols.append(base + pos[good])
                    vals.append(np.full(int(good.sum()), sign * c, dtype=np.int64))
    if not rows:
        return SparseMatrix.zeros(src.dim, tgt.dim)
    return SparseMatrix.build(src.dim, tgt.dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


# ---------------------------------------------------------------------------
# cohomology


@dataclass
class BringResult:
    dims: BigradedDims  # keyed by (q, w)
    wmax: int
    stabilized: bool
    sigma: str
    mode: str
    components: int = 0
    largest_block: int = 0

    @property
    def total(self) -> int:
        return self.dims.total()

    def by_w(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (_, w), v in self.dims.items():
            out[w] = out.get(w, 0) + v
        return out

    def report(self) -> dict:
        return {
            "slices": self.dims.as_list(),
            "total": self.total,
            "stabilized": self.stabilized,
            "sigma": self.sigma,
            "wmax": self.wmax,
            "mode": self.mode,
            "by_w": sorted([w, v] for w, v in self.by_w().items()),
        }

    def to_json(self) -> str:
        return json.dumps(self.report(), sort_keys=True, indent=2)


def default_wmax(pair: GorensteinPair) -> int:
    return 2 * pair.rank + 2


def bring_cohomology(pair: GorensteinPair, f, g, wmax: int | None = None, sigma: FanData | None = None,
                     mode: str = "modular", seed: int = 0, basis=None, budget: int = SLICE_BUDGET,
                     check: bool = True, verify_square: bool = False) -> BringResult:
    """Dimensions of H^(q, w) for w = 0..wmax.

    Each q is handled as one complex over w; it is split into the connected
    components of the graph of nonzero entries of d, and ranks are taken per
    component, so only components (not whole slices) have to fit ``budget``.
    """
    wmax = default_wmax(pair) if wmax is None else int(wmax)
    if check:
        if not is_nondegenerate(full_face(pair.K), f, mode, seed):
            raise DegeneracyError("f is degenerate")
        if not is_nondegenerate(full_face(pair.Kdual), g, mode, seed):
            raise DegeneracyError("g is degenerate")
    D = make_differential(pair, f, g, basis, sigma)
    r = pair.rank
    dims = BigradedDims()
    n_comp = 0
    largest = 0
    # upper bound on the entries of one row of d
    per_row = sum(int(np.count_nonzero(c)) for _, c in D.f_terms) + sum(int(np.count_nonzero(c)) for _, c in D.g_terms)
    for q in range(-(wmax + 1), wmax + r + 2):
        slices = [chain_slice(pair, q, w) for w in range(wmax + 2)]
        if all(s.dim == 0 for s in slices[: wmax + 1]):
            continue
        est = sum(s.dim for s in slices[: wmax + 1]) * per_row
        if est > NNZ_BUDGET:
            raise BudgetError(
                f"q={q}: about {est} nonzeros ({max(s.dim for s in slices)} rows in the largest slice) "
                f"exceed {NNZ_BUDGET}; a basis adapted to f and g may split the complex"
            )
        mats = [d_matrix(D, slices[w], slices[w + 1]) for w in range(wmax + 1)]
        if verify_square:
            for w in range(wmax):
                prod = mats[w].to_scipy() @ mats[w + 1].to_scipy()
                if prod.count_nonzero():
                    raise ArithmeticError(f"d^2 != 0 at q={q}, w={w}")
        offs = np.cumsum([0] + [s.dim for s in slices])
        total = int(offs[-1])
        rr, cc = [], []
        for w, M in enumerate(mats):
            rr.append(M.row + offs[w])
            cc.append(M.col + offs[w + 1])
        graph = sp.coo_matrix(
            (np.ones(sum(len(x) for x in rr)), (np.concatenate(rr), np.concatenate(cc))), shape=(total, total)
        )
        nc, labels = connected_components(graph, directed=False)
        n_comp += nc
        # ranks per (component, w)
        ranks = np.zeros(wmax + 1, dtype=np.int64)
        mats_csr = [M.to_scipy().tocsr() for M in mats]
        for w, M in enumerate(mats_csr):
            if M.nnz == 0:
                continue
            lab_r = labels[offs[w] : offs[w + 1]]
            lab_c = labels[offs[w + 1] : offs[w + 2]]
            active = np.unique(lab_r[np.diff(M.indptr) > 0])
            nr = np.bincount(lab_r, minlength=nc)[active]
            ncol = np.bincount(lab_c, minlength=nc)[active]
            size = np.minimum(nr, ncol)
            largest = max(largest, int(size.max()))
            big = active[size > SMALL_BLOCK]
            if len(big):
                worst = int(size.max())
                if worst > budget:
                    raise BudgetError(f"component of size {worst} at q={q}, w={w} exceeds the budget {budget}")
                for comp in big:
                    ri = np.nonzero(lab_r == comp)[0]
                    ci = np.nonzero(lab_c == comp)[0]
                    ranks[w] += _rank(SparseMatrix.from_scipy(M[ri][:, ci]), mode, seed)
            small_rows = ~np.isin(lab_r, big)
            Ms = sp.diags(small_rows.astype(np.int64)) @ M
            ranks[w] += block_rank(Ms, lab_r, lab_c, mode, seed)
        for w in range(wmax + 1):
            h = slices[w].dim - ranks[w] - (ranks[w - 1] if w > 0 else 0)
            if h < 0:
                raise ArithmeticError("negative cohomology dimension")
            dims.add((q, w), int(h))
    edge = [w for (_, w), v in dims.items() if v and w >= wmax - 1]
    return BringResult(dims, wmax, not edge, "none" if sigma is None else sigma.label, mode, n_comp, largest)


def fermat_basis(pair: GorensteinPair):
    """Integral basis of N dual (up to scaling) to the vertices of Delta when these form a lattice basis of M_Q.

    With vertex-only coefficients this basis makes each contraction act on a
    single exterior generator, so the complex splits into small components.
    """
    import flint

    V = [list(v) for v in pair.K.rays]
    if len(V) != pair.rank:
        raise ValidationError("Delta is not a simplex")
    Vq = flint.fmpq_mat(V)
    inv = Vq.inv()  # columns u_k with v_j . u_k = delta
    den = reduce(lcm, (int(inv[i, j].q) for i in range(pair.rank) for j in range(pair.rank)), 1)
    return [[int(inv[i, k] * den) for i in range(pair.rank)] for k in range(pair.rank)]


# ---------------------------------------------------------------------------
# comparison with the face-sum route


@dataclass
class Comparison:
    verdict: str
    bring_total: int
    w_total: int
    bring_by_w: dict
    w_by_w: dict
    mismatches: list = field(default_factory=list)

    def report(self) -> dict:
        return {
            "verdict": self.verdict,
            "bring_total": self.bring_total,
            "w_total": self.w_total,
            "bring_by_w": sorted([k, v] for k, v in self.bring_by_w.items()),
            "w_by_w": sorted([k, v] for k, v in self.w_by_w.items()),
            "mismatches": self.mismatches,
        }


def compare_results(bring: BringResult, table) -> Comparison:
    bw, ww = bring.by_w(), table.by_w()
    keys = sorted(set(bw) | set(ww))
    mism = [[k, bw.get(k, 0), ww.get(k, 0)] for k in keys if bw.get(k, 0) != ww.get(k, 0)]
    ok = not mism and bring.total == table.total and bring.stabilized
    return Comparison("PASS" if ok else "FAIL", bring.total, table.total, bw, ww, mism)


def compare_with_w(pair: GorensteinPair, f, g, wmax: int | None = None, mode: str = "modular", seed: int = 0,
                   g_for_w=None, **kwargs) -> Comparison:
    """Run both routes; ``g_for_w`` (default g) allows a deliberate mismatch as a negative control."""
    from .chiral_ring import w_table

    bring = bring_cohomology(pair, f, g, wmax, mode=mode, seed=seed, **kwargs)
    table = w_table(pair.K, f, g if g_for_w is None else g_for_w, mode=mode, seed=seed)
    return compare_results(bring, table)


__all__ = [
    "BringResult",
    "ChainSlice",
    "Comparison",
    "FanData",
    "PairedMonomial",
    "bring_cohomology",
    "build_L_basis",
    "chain_slice",
    "compare_results",
    "compare_with_w",
    "d_matrix",
    "default_wmax",
    "face_fan",
    "fan_from_heights",
    "fermat_basis",
    "make_differential",
    "parse_heights",
    "random_fan",
]
