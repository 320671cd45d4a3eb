"""The split Koszul spaces W(f; n0) and the diagnostics built on them.

For n0 in N the generators z_i = z_{e_i} split by the level m.n0 of their
terms: z_{i,j} collects the terms with m.n0 = j.  W(f; n0) is the homology of
the Koszul complex of all z_{i,j} over C[K] (or C[K]^Phi).  The exterior
generator e_{i,j} has bidegree (1, j) in the grading (.deg*, .n0), so the
contraction differential preserves both degrees and the exterior-degree-0
part carries the grading of C[K].
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .. import semigroup_ring as sr
from ..errors import BudgetError, DegeneracyError, ValidationError
from ..lattice_geometry import Cone, Face, dot, full_face, int_rank, lattice_point_array
from . import linalg
from .quotient import RankAudit, modular_runs, quotient_data, rank
from .sparse import SparseMatrix

EXTERIOR_BUDGET = 14


@dataclass
class BigradedDims:
    """Dimensions keyed by two integer charges; zero entries are dropped."""

    table: dict = field(default_factory=dict)

    def add(self, key, value: int) -> None:
        if value < 0:
            raise ValueError("negative dimension")
        if value:
            self.table[key] = self.table.get(key, 0) + int(value)

    def get(self, key) -> int:
        return self.table.get(key, 0)

    def total(self) -> int:
        return sum(self.table.values())

    def items(self):
        return sorted(self.table.items())

    def as_list(self) -> list[list[int]]:
        return [[int(k[0]), int(k[1]), int(v)] for k, v in self.items()]

    def keys(self):
        return sorted(self.table)

    def __eq__(self, other) -> bool:
        return isinstance(other, BigradedDims) and self.table == other.table


@dataclass
class SplitGenerators:
    n0: tuple
    levels: list[int]
    z_parts: dict  # (i, j) -> GradedElement

    def labels(self) -> list[tuple[int, int]]:
        return sorted(self.z_parts)


@dataclass
class WResult:
    n0: tuple
    dims: BigradedDims
    window: dict
    vanishing_at_edge: bool
    mode: str
    method: str
    euler_checked: bool = False

    def report(self) -> dict:
        return {
            "n0": list(self.n0),
            "grading": self.dims.as_list(),
            "window": self.window,
            "vanishing_at_edge": self.vanishing_at_edge,
            "mode": self.mode,
            "method": self.method,
            "total": self.dims.total(),
        }


def _theta(K) -> Face:
    return full_face(K) if isinstance(K, Cone) else K


def level_set(K, n0) -> list[int]:
    """I(n0): the values m.n0 over the lattice points m of Delta."""
    theta = _theta(K)
    if len(n0) != theta.cone.ambient_rank:
        raise ValidationError("n0 has the wrong rank")
    pts = lattice_point_array(theta, 1)
    return sorted({int(v) for v in pts @ np.array(n0, dtype=np.int64)})


def split_generators(K, f, n0) -> SplitGenerators:
    theta = _theta(K)
    n = theta.cone.ambient_rank
    n0 = tuple(int(x) for x in n0)
    if len(n0) != n:
        raise ValidationError("n0 has the wrong rank")
    levels = level_set(theta, n0)
    parts = {}
    for i in range(n):
        e = tuple(int(t == i) for t in range(n))
        z = sr.z_element(f, e)
        for j in levels:
            parts[(i, j)] = sr.GradedElement(1, {m: c for m, c in z.terms.items() if dot(m, n0) == j})
    return SplitGenerators(n0, levels, parts)


def default_top_degree(K) -> int:
    """Top degree of the Artinian reduction: rank minus the Gorenstein index."""
    theta = _theta(K)
    cone = theta.cone
    deg = cone.dual.degree_vector
    index = min(dot(deg, r) for r in cone.rays) if cone.rays else 1
    return cone.ambient_rank - index


def default_window(K) -> int:
    return _theta(K).cone.ambient_rank + default_top_degree(K) + 2


# ---------------------------------------------------------------------------
# direct bigraded Koszul computation


class _Chains:
    """Basis of the Koszul chains e_S (x) [x] with fixed total .deg* degree a."""

    def __init__(self, theta, labels, a, n0):
        self.blocks = {}  # p -> list of (S, level, pts-index array, bvals)
        self.theta = theta
        self.labels = labels
        self.a = a
        nv = np.array(n0, dtype=np.int64)
        for p in range(0, min(len(labels), a) + 1):
            lvl = a - p
            pts = lattice_point_array(theta, lvl)
            if len(pts) == 0:
                continue
            xb = pts @ nv
            for S in combinations(range(len(labels)), p):
                sj = sum(labels[s][0] for s in S)
                self.blocks.setdefault(p, []).append((S, lvl, xb + sj))

    def index(self, p, b):
        """Ordered basis (S, point index) of C_p in the slice b."""
        out = []
        for S, lvl, bv in self.blocks.get(p, []):
            for x in np.nonzero(bv == b)[0]:
                out.append((S, int(x)))
        return out

    def b_values(self):
        vals = set()
        for blocks in self.blocks.values():
            for _, _, bv in blocks:
                vals.update(int(v) for v in np.unique(bv))
        return sorted(vals)


def _koszul_matrix(theta, labels, gens_int, phi, src, tgt, lvl_src):
    """Matrix of d: C_p -> C_{p-1} between two bases of one (a, b) slice."""
    tgt_pos = {key: i for i, key in enumerate(tgt)}
    rows, cols, vals = [], [], []
    pts_src = lattice_point_array(theta, lvl_src) if lvl_src >= 0 else None
    idx_next = sr.point_index(theta, lvl_src + 1)
    mem_cache = {}
    for r, (S, x) in enumerate(src):
        xpt = pts_src[x]
        for pos, t in enumerate(S):
            rest = S[:pos] + S[pos + 1 :]
            sign = -1 if pos % 2 else 1
            for m, c in gens_int[t]:
                if phi is not None:
                    key = (lvl_src, x, m)
                    ok = mem_cache.get(key)
                    if ok is None:
                        ok = phi.same_cell(tuple(int(v) for v in xpt), m)
                        mem_cache[key] = ok
                    if not ok:
                        continue
                y = idx_next.lookup((xpt + np.array(m, dtype=np.int64))[None, :])[0]
                if y < 0:
                    continue
                col = tgt_pos.get((rest, int(y)))
                if col is None:
                    continue
                rows.append(r)
                cols.append(col)
                vals.append(sign * c)
    return SparseMatrix.build(len(src), len(tgt), rows, cols, vals)


def stripped_sequence(theta, sg: SplitGenerators) -> tuple[list, list[int]]:
    """Per level, a maximal independent subset of the z_{i,j}, plus the levels of the dropped ones.

    Inside one level this is a change of basis of the generators, so it keeps
    the bigrading; each dropped (zero after the change) generator contributes
    a free exterior factor.
    """
    rk = theta.cone.ambient_rank
    gens, zeros = [], []
    for j, (elems, d, support) in sorted(_level_basis(sg, rk).items()):
        gens.extend((j, e) for e in _complete(elems, [], d, support))
        zeros.extend([j] * (len(elems) - d))
    return gens, zeros


def _tensor_exterior(dims: BigradedDims, zeros: list[int]) -> BigradedDims:
    for j in zeros:
        nxt = BigradedDims()
        for (a, b), v in dims.items():
            nxt.add((a, b), v)
            nxt.add((a + 1, b + j), v)
        dims = nxt
    return dims


def w_direct(K, f, n0, amax: int, mode: str = "modular", seed: int = 0, phi=None, audit=None,
             budget: int = EXTERIOR_BUDGET, strip: bool = True) -> tuple[BigradedDims, bool]:
    """Homology of the split Koszul complex slice by slice; returns (dims, Euler check).

    With ``strip`` the zero generators of a level-wise basis are split off as
    exterior factors first.
    """
    theta = _theta(K)
    sg = split_generators(theta, f, n0)
    if len(sg.z_parts) > budget:
        raise BudgetError(f"{len(sg.z_parts)} split generators exceed the exterior budget {budget}")
    if strip:
        labels, zeros = stripped_sequence(theta, sg)
    else:
        labels = [(j, sg.z_parts[(i, j)]) for i, j in sg.labels()]
        zeros = []
    gens_int = [sr._element_integer_terms(e) if e.terms else [] for _, e in labels]
    # the stripped complex vanishes above top + (#generators - rank); one more
    # degree is computed so the vanishing is observed rather than assumed
    inner = min(amax, default_top_degree(theta) + max(len(labels) - theta.dim, 0) + 1)
    dims = BigradedDims()
    for a in range(inner + 1):
        ch = _Chains(theta, labels, a, sg.n0)
        for b in ch.b_values():
            bases = {p: ch.index(p, b) for p in ch.blocks}
            ranks = {}
            for p in sorted(bases):
                if p == 0 or not bases[p] or not bases.get(p - 1):
                    ranks[p] = 0
                    continue
                M = _koszul_matrix(theta, labels, gens_int, phi, bases[p], bases[p - 1], a - p)
                ranks[p] = rank(M, mode, seed)
                if audit is not None:
                    audit.add(f"W a={a} b={b} p={p}", M.shape, ranks[p], mode)
            h = 0
            euler_chain = 0
            euler_h = 0
            for p, basis in bases.items():
                hp = len(basis) - ranks.get(p, 0) - ranks.get(p + 1, 0)
                if hp < 0:
                    raise ArithmeticError("inconsistent Koszul ranks")
                h += hp
                euler_chain += (-1) ** p * len(basis)
                euler_h += (-1) ** p * hp
            if euler_chain != euler_h:
                raise ArithmeticError("Euler characteristic mismatch")
            dims.add((a, b), h)
    full = _tensor_exterior(dims, zeros)
    out = BigradedDims()
    for (a, b), v in full.items():
        if a <= amax:
            out.add((a, b), v)
    return out, True


# ---------------------------------------------------------------------------
# reduction to an Artinian quotient
#
# A level-wise change of basis of the span of the z_{i,j} keeps the bigrading.
# It turns the sequence into (zero elements) + (u: a bigraded regular sequence
# of length rank) + (w: the rest).  Then
#   W = exterior algebra on the zeros (x) H(Koszul(w; R/(u))),
# and R/(u) is finite-dimensional, so every slice is small.


@dataclass
class ReducedSequence:
    u: list  # (level, GradedElement), a regular sequence
    w: list  # (level, GradedElement)
    zeros: list[int]  # levels of the zero generators


def _level_basis(sg: SplitGenerators, rank_: int):
    """Per level: the z_{i,j} and the dimension of their span."""
    out = {}
    for j in sg.levels:
        elems = [sg.z_parts[(i, j)] for i in range(rank_)]
        support = sorted({m for e in elems for m in e.terms})
        rows = [[e.terms.get(m, 0) for m in support] for e in elems]
        den = 1
        for r in rows:
            for v in r:
                den = den * getattr(v, "denominator", 1) // np.gcd(den, getattr(v, "denominator", 1))
        out[j] = (elems, int_rank([[int(v * den) for v in r] for r in rows]) if support else 0, support)
    return out


def _assignments(dims: dict, total: int):
    """Ways to pick ``total`` elements, at most dims[j] from level j."""
    levels = [j for j in sorted(dims) if dims[j] > 0]

    def rec(i, left):
        if i == len(levels):
            if left == 0:
                yield {}
            return
        for c in range(min(dims[levels[i]], left), -1, -1):
            for rest in rec(i + 1, left - c):
                yield {levels[i]: c, **rest} if c else rest

    yield from rec(0, total)


def _combination(elems, coeffs) -> sr.GradedElement:
    out = sr.GradedElement(1, {})
    for e, c in zip(elems, coeffs):
        out = out + e.scale(c)
    return out


def _complete(elems, chosen, need: int, support):
    """Extend ``chosen`` by original elements until the span has dimension ``need``."""
    def mat(es):
        rows = []
        for e in es:
            den = 1
            for c in e.terms.values():
                den = den * c.denominator // np.gcd(den, c.denominator)
            rows.append([int(e.terms.get(m, 0) * den) for m in support])
        return rows

    extra = []
    current = int_rank(mat(chosen)) if chosen else 0
    for e in elems:
        if current == need:
            break
        r = int_rank(mat(chosen + extra + [e]))
        if r > current:
            extra.append(e)
            current = r
    if current != need:
        raise ArithmeticError("failed to complete a basis of the level span")
    return extra


def reduce_sequence(theta, f, sg: SplitGenerators, hstar: list[int], seed: int = 0, phi=None,
                    attempts: int = 48) -> ReducedSequence | None:
    """Search for a bigraded regular sequence inside the span of the split generators.

    A candidate u is accepted when R/(u) has Hilbert function h*; for a
    Cohen-Macaulay ring this is equivalent to u being regular.
    """
    rk = theta.cone.ambient_rank
    dim = theta.dim
    basis = _level_basis(sg, rk)
    dims = {j: b[1] for j, b in basis.items()}
    rng = np.random.default_rng([seed, 4099])
    tried = 0
    for assign in _assignments(dims, dim):
        for _ in range(2):
            if tried >= attempts:
                return None
            tried += 1
            u = []
            for j, c in sorted(assign.items()):
                elems = basis[j][0]
                for _ in range(c):
                    u.append((j, _combination(elems, rng.integers(1, 1 << 10, size=len(elems)).tolist())))
            gens = [e for _, e in u]
            got = modular_runs(theta, gens, len(hstar), seed, phi)[0].dims
            if list(got[: len(hstar)]) != list(hstar) or got[len(hstar)] != 0:
                continue
            w, zeros = [], []
            for j, (elems, d, support) in sorted(basis.items()):
                chosen = [e for jj, e in u if jj == j]
                w.extend((j, e) for e in _complete(elems, chosen, d, support))
                zeros.extend([j] * (len(elems) - d))
            return ReducedSequence(u, w, zeros)
    return None


def _artinian_pieces(theta, red: ReducedSequence, top: int, n0, p: int, phi, seed: int):
    """Bigraded pieces of R/(u) over F_p: {(k, b): (global columns, rref dual, pivots)}."""
    nv = np.array(n0, dtype=np.int64)
    u_levels = [j for j, _ in red.u]
    gens = [e for _, e in red.u]
    pieces = {}
    for k in range(top + 1):
        pts = lattice_point_array(theta, k)
        bvals = pts @ nv
        if k == 0:
            pieces[(0, int(bvals[0]))] = (np.array([0]), np.ones((1, 1)), [0])
            continue
        A = sr.stacked_multiplication(gens, theta, k - 1, phi).to_scipy().tocsr()
        n_src = len(lattice_point_array(theta, k - 1))
        bsrc = lattice_point_array(theta, k - 1) @ nv
        row_b = np.concatenate([bsrc + j for j in u_levels]) if gens else np.zeros(0, dtype=np.int64)
        for b in np.unique(bvals):
            cols = np.nonzero(bvals == b)[0]
            rows = np.nonzero(row_b == b)[0]
            if len(rows):
                sub = A[rows][:, cols]
                X = linalg.left_nullspace_modp(sub.T, p, seed)
            else:
                X = np.eye(len(cols))
            if X.shape[0] == 0:
                continue
            R, piv = linalg.rref_modp(X, p)
            pieces[(k, int(b))] = (cols, R, [int(cols[c]) for c in piv])
        del n_src
    return pieces


def _action_matrices(theta, red: ReducedSequence, pieces, p: int, phi):
    """For each w and each piece (k, b): matrix of w into piece (k+1, b+j) (rows = source basis)."""
    acts = []
    cache = {}
    for j, e in red.w:
        per = {}
        for (k, b), (cols, R, piv) in pieces.items():
            tgt = pieces.get((k + 1, b + j))
            if tgt is None:
                continue
            key = (id(e), k)
            if key not in cache:
                cache[key] = sr.stacked_multiplication([e], theta, k, phi).to_scipy().tocsr()
            M = cache[key][piv][:, tgt[0]].toarray()
            per[(k, b)] = linalg.matmul_mod(linalg.to_residues(M, p), tgt[1].T.copy(), p)
        acts.append(per)
    return acts


def _reduced_homology(theta, red: ReducedSequence, top: int, n0, p: int, phi, seed: int) -> BigradedDims:
    pieces = _artinian_pieces(theta, red, top, n0, p, phi, seed)
    acts = _action_matrices(theta, red, pieces, p, phi)
    wl = [j for j, _ in red.w]
    s = len(wl)
    # chain blocks grouped by total bidegree and exterior degree
    slices: dict = {}
    for S in _subsets(s):
        sj = sum(wl[t] for t in S)
        for (k, b), (_, R, _) in pieces.items():
            key = (k + len(S), b + sj)
            slices.setdefault(key, {}).setdefault(len(S), []).append((S, (k, b), R.shape[0]))
    dims = BigradedDims()
    for key, by_p in slices.items():
        offsets = {}
        for q, blocks in by_p.items():
            off = 0
            for S, piece, h in blocks:
                offsets[(S, piece)] = off
                off += h
            offsets[("size", q)] = off
        ranks = {}
        for q, blocks in by_p.items():
            if q == 0 or (q - 1) not in by_p:
                ranks[q] = 0
                continue
            D = np.zeros((offsets[("size", q)], offsets[("size", q - 1)]))
            for S, (k, b), h in blocks:
                r0 = offsets[(S, (k, b))]
                for pos, t in enumerate(S):
                    rest = S[:pos] + S[pos + 1 :]
                    act = acts[t].get((k, b))
                    if act is None:
                        continue
                    c0 = offsets[(rest, (k + 1, b + wl[t]))]
                    sign = -1.0 if pos % 2 else 1.0
                    D[r0 : r0 + h, c0 : c0 + act.shape[1]] += sign * act
            linalg.reduce_mod(D, p)
            ranks[q] = linalg.rank_dense_modp(D, p)
        for q in by_p:
            dims.add(key, offsets[("size", q)] - ranks.get(q, 0) - ranks.get(q + 1, 0))
    for j in red.zeros:
        nxt = BigradedDims()
        for (a, b), v in dims.items():
            nxt.add((a, b), v)
            nxt.add((a + 1, b + j), v)
        dims = nxt
    return dims


def _subsets(s: int):
    for q in range(s + 1):
        yield from combinations(range(s), q)


def w_reduced(K, f, n0, amax: int, seed: int = 0, phi=None, hstar: list[int] | None = None) -> BigradedDims | None:
    """W(f; n0) through the Artinian reduction; None when no regular u was found."""
    theta = _theta(K)
    sg = split_generators(theta, f, n0)
    if hstar is None:
        hstar = quotient_data(theta, f, theta.dim + 1, "modular", seed, phi)[0].dims[: theta.dim + 1]
    top = max(k for k, v in enumerate(hstar) if v)
    red = reduce_sequence(theta, f, sg, list(hstar), seed, phi)
    if red is None:
        return None
    results = []
    for p in linalg.random_primes(seed + 31, 3):
        results.append(_reduced_homology(theta, red, top, sg.n0, p, phi, seed))
    if any(r != results[0] for r in results):
        raise ArithmeticError("reduced Koszul homology disagrees across primes")
    out = BigradedDims()
    for (a, b), v in results[0].items():
        if a <= amax:
            out.add((a, b), v)
    return out


def full_window(K, n0) -> int:
    """A .deg* degree beyond which W(f; n0) vanishes: top degree + rank*(|I(n0)| - 1)."""
    theta = _theta(K)
    return default_top_degree(theta) + theta.cone.ambient_rank * (len(level_set(theta, n0)) - 1)


def w_space_dims(K, f, n0, window: int | None = None, mode: str = "modular", seed: int = 0, phi=None,
                 audit=None, budget: int = EXTERIOR_BUDGET, method: str = "auto", check_degenerate: bool = True) -> WResult:
    """Bigraded dimensions of W(f; n0) for .deg* degrees 0..window.

    Methods: "regular-sequence" (one level: the Koszul complex of the regular
    sequence z_1..z_r, i.e. the Artinian quotient in exterior degree 0),
    "reduced" (the Artinian reduction above), "direct" (slice-by-slice
    homology over C[K]).  "auto" picks the first that applies; exact mode
    always uses the direct route.
    """
    theta = _theta(K)
    levels = level_set(theta, n0)
    if window is None:
        window = max(default_window(theta), full_window(theta, n0) + 1)
    amax = int(window)
    rk = theta.cone.ambient_rank
    if rk * len(levels) > budget:
        raise BudgetError(f"rank * |I(n0)| = {rk * len(levels)} exceeds the exterior budget {budget}")
    if mode not in ("modular", "exact"):
        raise ValidationError(f"unknown mode {mode!r}")
    if check_degenerate and not is_nondegenerate(theta, f, mode, seed, phi):
        raise DegeneracyError("coefficient function is degenerate")
    if method == "auto":
        if len(levels) == 1:
            method = "regular-sequence"
        else:
            method = "reduced" if mode == "modular" else "direct"
    dims = None
    euler = False
    if method == "regular-sequence":
        if len(levels) != 1:
            raise ValidationError("regular-sequence route needs a single level")
        c = levels[0]
        q = quotient_data(theta, f, amax, mode, seed, phi, audit)[0].dims
        dims = BigradedDims()
        for a, v in enumerate(q):
            dims.add((a, c * a), v)
    elif method == "reduced":
        dims = w_reduced(theta, f, n0, amax, seed, phi)
        if dims is None:
            method = "direct"
    elif method != "direct":
        raise ValidationError(f"unknown method {method!r}")
    if method == "direct":
        dims, euler = w_direct(theta, f, n0, amax, mode, seed, phi, audit, budget)
    edge = all(a < amax for a, _ in dims.keys())
    return WResult(tuple(int(x) for x in n0), dims, {"deg_star": [0, amax]}, edge, mode, method, euler)


# ---------------------------------------------------------------------------
# non-degeneracy and probes


def is_nondegenerate(K, f, mode: str = "modular", seed: int = 0, phi=None) -> bool:
    """Quotient vanishes in degrees rank+1 and rank+2 (beyond the top degree)."""
    theta = _theta(K)
    if f.is_zero():
        return False
    rk = theta.dim
    dims = quotient_data(theta, f, rk + 2, mode, seed, phi)[0].dims
    return dims[rk + 1] == 0 and dims[rk + 2] == 0


def probe_strong_nondegeneracy(K, f, n0_list, trials: int = 5, seed: int = 0, mode: str = "modular",
                               window: int | None = None, budget: int = EXTERIOR_BUDGET) -> dict:
    """Compare W(f; n0) with W for ``trials`` random coefficient functions.

    The verdict is PASS when f attains the componentwise minimum seen; this
    can only fail to falsify strong non-degeneracy, never prove it.
    """
    theta = _theta(K)
    if not is_nondegenerate(theta, f, mode, seed):
        raise DegeneracyError("coefficient function is degenerate; probe rejected")
    pts = lattice_point_array(theta, 1)
    others = [sr.sample_coefficients([tuple(int(x) for x in p) for p in pts], 1000003 * (seed + 1) + t)
              for t in range(trials)]
    entries = []
    verdict = True
    for n0 in _dedupe_by_partition(theta, n0_list):
        base = w_space_dims(theta, f, n0, window, mode, seed, budget=budget).dims
        tables = [base]
        for g in others:
            tables.append(w_space_dims(theta, g, n0, window, mode, seed, budget=budget).dims)
        keys = sorted({k for t in tables for k in t.keys()})
        minimum = {k: min(t.get(k) for t in tables) for k in keys}
        ok = all(base.get(k) == minimum[k] for k in keys)
        all_equal = all(t == base for t in tables)
        verdict &= ok
        entries.append({
            "n0": list(n0),
            "f_dims": base.as_list(),
            "minimum": [[k[0], k[1], v] for k, v in sorted(minimum.items()) if v],
            "attains_minimum": ok,
            "all_trials_equal": all_equal,
        })
    return {"verdict": "PASS" if verdict else "FAIL", "trials": trials, "entries": entries,
            "note": "not falsified by sampling; not a proof"}


def _dedupe_by_partition(theta, n0_list):
    """Drop n0 inducing the same level partition and level values as an earlier one."""
    pts = lattice_point_array(theta, 1)
    seen = set()
    out = []
    for n0 in n0_list:
        key = tuple(int(v) for v in pts @ np.array(n0, dtype=np.int64))
        if key in seen:
            continue
        seen.add(key)
        out.append(tuple(int(x) for x in n0))
    return out


def semicontinuity_check(K, f_generic, phi, f_phi, n0, window: int | None = None, mode: str = "modular",
                         seed: int = 0, budget: int = EXTERIOR_BUDGET) -> dict:
    """Check dim W(f; n0)_{a,b} <= dim W(f^phi; n0)^phi_{a,b} for every bidegree."""
    theta = _theta(K)
    if not is_nondegenerate(theta, f_phi, mode, seed, phi):
        raise DegeneracyError("f_phi is degenerate for the partial ring")
    lhs = w_space_dims(theta, f_generic, n0, window, mode, seed, budget=budget)
    rhs = w_space_dims(theta, f_phi, n0, window, mode, seed, phi=phi, budget=budget, check_degenerate=False)
    keys = sorted(set(lhs.dims.keys()) | set(rhs.dims.keys()))
    violations = [[k[0], k[1], lhs.dims.get(k), rhs.dims.get(k)] for k in keys if lhs.dims.get(k) > rhs.dims.get(k)]
    return {
        "n0": list(n0),
        "verdict": "PASS" if not violations else "FAIL",
        "violations": violations,
        "generic": lhs.dims.as_list(),
        "partial": rhs.dims.as_list(),
        "cells": len(phi.cells),
    }


def ha_shift(K, n0) -> int:
    """Constant part of H_A on the Koszul model: rank * sum over negative levels of (-1-j)."""
    theta = _theta(K)
    rk = theta.cone.ambient_rank
    return rk * sum(-1 - j for j in level_set(theta, n0) if j < 0)


def ha_on_w_space(K, f, n0, window: int | None = None, mode: str = "modular", seed: int = 0,
                  budget: int = EXTERIOR_BUDGET) -> dict:
    """W(f; n0) regrouped by the H_A eigenvalue a + b + ha_shift(n0)."""
    theta = _theta(K)
    w = w_space_dims(theta, f, n0, window, mode, seed, budget=budget)
    shift = ha_shift(theta, n0)
    by_ha: dict[int, int] = {}
    for (a, b), v in w.dims.items():
        by_ha[a + b + shift] = by_ha.get(a + b + shift, 0) + v
    return {
        "n0": list(w.n0),
        "by_ha": sorted([h, v] for h, v in by_ha.items()),
        "min_ha": min(by_ha) if by_ha else None,
        "in_shifted_dual": in_shifted_dual_cone(theta.cone, n0),
        "vanishing_at_edge": w.vanishing_at_edge,
    }


def in_shifted_dual_cone(K: Cone, n0) -> bool:
    """Whether n0 + deg* lies in K* (i.e. n0 in K* - deg*)."""
    shifted = tuple(int(a) + int(b) for a, b in zip(n0, K.degree_vector))
    return all(dot(r, shifted) >= 0 for r in K.rays)


__all__ = [
    "BigradedDims",
    "RankAudit",
    "SplitGenerators",
    "WResult",
    "ReducedSequence",
    "default_window",
    "full_window",
    "ha_shift",
    "in_shifted_dual_cone",
    "level_set",
    "reduce_sequence",
    "ha_on_w_space",
    "is_nondegenerate",
    "probe_strong_nondegeneracy",
    "semicontinuity_check",
    "split_generators",
    "w_direct",
    "w_reduced",
    "w_space_dims",
]
