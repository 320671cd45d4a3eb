"""Graded pieces of C[theta]/I_f together with bases of their duals.

For each degree k we keep a basis of Q_k^* (functionals on the degree-k
monomials that kill I_f).  Small degrees come from a direct left null space of
the stacked multiplication matrix.  Large degrees use the inverse-system step:
a functional psi on degree k+1 is determined by alpha_m = psi([m] * -) in
Q_k^*, subject to gluing conditions, so only |support| * dim Q_k unknowns
appear.  Once Q_k = 0 the next piece is spanned by monomials that are not a
product of a degree-1 and a degree-k monomial.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import flint
import numpy as np
import scipy.sparse as sp

from .. import semigroup_ring as sr
from ..errors import BudgetError, ValidationError
from ..lattice_geometry import Face, lattice_point_array
from . import linalg
from .sparse import SparseMatrix

log = logging.getLogger(__name__)

DIRECT_LIMIT = 12000
INVERSE_LIMIT = 4000
EQUATION_CHUNK = 8192
ESCALATIONS = 2


@dataclass
class RankAudit:
    """Every rank decision made in a run, for the modular/exact audit."""

    records: list = field(default_factory=list)

    def add(self, label: str, shape, value, mode: str) -> None:
        self.records.append({"label": label, "shape": list(shape), "value": int(value), "mode": mode})


# ---------------------------------------------------------------------------
# rank front end


def rank(mat: SparseMatrix, mode: str = "modular", seed: int = 0) -> int:
    """Rank over Q.  Modular: three random primes must agree (escalating), else exact."""
    if mode not in ("modular", "exact"):
        raise ValidationError(f"unknown rank mode {mode!r}")
    if mat.nnz == 0:
        return 0
    if mode == "exact":
        return linalg.rank_exact(mat.to_scipy())
    A = mat.to_scipy()
    for round_ in range(ESCALATIONS + 1):
        primes = linalg.random_primes(seed + 7919 * round_, 3)
        ranks = {linalg.rank_sparse_modp(A, p, seed) for p in primes}
        if len(ranks) == 1:
            return ranks.pop()
        log.warning("modular ranks disagree %s; escalating", sorted(ranks))
    log.warning("modular ranks never agreed; falling back to exact elimination")
    return linalg.rank_exact(A)


# ---------------------------------------------------------------------------
# generators of I_f on a face


def face_generators(theta: Face, f) -> list:
    """z_{e_i} restricted to theta for a coordinate set injective on span(theta)."""
    pts = lattice_point_array(theta, 1)
    if theta.dim == 0:
        return []
    cols: list[int] = []
    from ..lattice_geometry import int_rank

    rows = pts.tolist()
    for j in range(pts.shape[1]):
        if int_rank([[r[c] for c in cols + [j]] for r in rows]) > len(cols):
            cols.append(j)
        if len(cols) == theta.dim:
            break
    n = pts.shape[1]
    gens = []
    on = {tuple(int(x) for x in p) for p in pts}
    for j in cols:
        e = tuple(int(i == j) for i in range(n))
        gens.append(sr.z_element(f, e).restrict(on))
    return gens


# ---------------------------------------------------------------------------
# per-field quotient data


@dataclass
class QuotientData:
    theta: Face
    dims: list[int]
    duals: list  # per degree: float residues (h x |R_k|) or flint fmpz_mat
    field: int | None  # prime, or None for Q
    routes: list[str]

    def is_exact(self) -> bool:
        return self.field is None


def _direct_dual(theta, gens, k, p, phi, seed, audit):
    """Modular: basis of Q_k^*.  Exact: the image matrix itself (rows span I_k)."""
    n = len(lattice_point_array(theta, k))
    A = sr.stacked_multiplication(gens, theta, k - 1, phi) if gens else SparseMatrix.zeros(0, n)
    mode = f"mod {p}" if p is not None else "exact"
    if p is None:
        r = linalg.rank_exact(A.to_scipy()) if A.nnz else 0
        if audit is not None:
            audit.add(f"{theta!r} k={k}", A.shape, r, mode)
        return A, n - r
    if A.nnz == 0:
        X = np.eye(n)
    else:
        X = linalg.left_nullspace_modp(A.transpose().to_scipy(), p, seed)
    if audit is not None:
        audit.add(f"{theta!r} k={k}", A.shape, n - X.shape[0], mode)
    return X, X.shape[0]


def _decompositions(theta, k, support, phi):
    """Columns (into degree k) of mu - m for each degree-1 m; -1 if not a (partial) product."""
    table = []
    R_next = lattice_point_array(theta, k + 1)
    idx_k = sr.point_index(theta, k)
    masks_next = phi.membership(R_next) if phi is not None else None
    for m in support:
        cols = idx_k.lookup(R_next - np.array(m, dtype=np.int64))
        if phi is not None:
            ok = cols >= 0
            rest = np.zeros((len(R_next), len(phi.cells)), dtype=bool)
            rest[ok] = phi.membership(R_next[ok] - np.array(m, dtype=np.int64))
            mm = phi.membership(np.array([m]))[0]
            cols = np.where(np.any(rest & mm, axis=1), cols, -1)
        table.append(cols)
    del masks_next
    return np.array(table, dtype=np.int64).reshape(len(support), len(R_next))


def _indecomposable_count(theta, k, phi) -> tuple[int, np.ndarray]:
    support = [tuple(int(x) for x in m) for m in lattice_point_array(theta, 1)]
    table = _decompositions(theta, k - 1, support, phi)
    indec = np.all(table < 0, axis=0)
    return int(indec.sum()), indec


def _inverse_step(theta, gens, k, Phi, p, phi, seed, audit):
    """Basis of Q_{k+1}^* from a basis Phi of Q_k^* (modular only)."""
    support = [tuple(int(x) for x in m) for m in lattice_point_array(theta, 1)]
    S, h = len(support), Phi.shape[0]
    u = S * h
    if u > INVERSE_LIMIT:
        raise BudgetError(f"inverse-system step needs {u} unknowns (limit {INVERSE_LIMIT})")
    table = _decompositions(theta, k, support, phi)  # S x |R_{k+1}|
    n_next = table.shape[1]
    valid = table >= 0
    indec = ~np.any(valid, axis=0)
    first = np.argmax(valid, axis=0)
    nu0 = table[first, np.arange(n_next)]
    PhiT = Phi.T.copy()  # |R_k| x h

    def blocks():
        # gluing: alpha_m(mu - m) = alpha_first(mu - first)
        for mi in range(S):
            sel = np.nonzero(valid[mi] & (first != mi))[0]
            for s in range(0, len(sel), EQUATION_CHUNK):
                js = sel[s : s + EQUATION_CHUNK]
                E = np.zeros((len(js), u))
                E[:, mi * h : (mi + 1) * h] = PhiT[table[mi, js]]
                f0 = first[js]
                rows = np.arange(len(js))
                for t in range(h):
                    E[rows, f0 * h + t] -= PhiT[nu0[js], t]
                yield linalg.reduce_mod(E, p)
        n_k = Phi.shape[1]
        if phi is not None:
            # alpha_m vanishes on monomials not sharing a cell with m
            R_k = lattice_point_array(theta, k)
            mk = phi.membership(R_k)
            for mi, m in enumerate(support):
                mm = phi.membership(np.array([m]))[0]
                sel = np.nonzero(~np.any(mk & mm, axis=1))[0]
                for s in range(0, len(sel), EQUATION_CHUNK):
                    js = sel[s : s + EQUATION_CHUNK]
                    E = np.zeros((len(js), u))
                    E[:, mi * h : (mi + 1) * h] = PhiT[js]
                    yield E
        # indecomposable degree-k monomials: psi(z_i * nu) = 0 is not automatic
        if k >= 1:
            _, indec_k = _indecomposable_count(theta, k, phi)
            js = np.nonzero(indec_k)[0]
            if len(js):
                zt = _generator_table(gens, support, p)
                for g in range(zt.shape[0]):
                    E = np.zeros((len(js), u))
                    for mi in range(S):
                        if zt[g, mi]:
                            E[:, mi * h : (mi + 1) * h] = zt[g, mi] * PhiT[js]
                    yield linalg.reduce_mod(E, p)
        del n_k

    C = _compressed_nullspace(blocks, u, p, seed)
    h_next = C.shape[0]
    # psi(mu) = alpha_first(mu)(nu0(mu))
    Psi = np.zeros((h_next + int(indec.sum()), n_next))
    if h_next:
        dec = ~indec
        cols = np.nonzero(dec)[0]
        Cr = C.reshape(h_next, S, h)
        acc = np.zeros((h_next, len(cols)))
        for t in range(h):
            acc += Cr[:, first[cols], t] * PhiT[nu0[cols], t][None, :]
            linalg.reduce_mod(acc, p)
        Psi[:h_next, cols] = acc
    for r, j in enumerate(np.nonzero(indec)[0]):
        Psi[h_next + r, j] = 1.0
    if audit is not None:
        audit.add(f"{theta!r} k={k + 1} (inverse system)", (u, u), u - h_next, f"mod {p}")
    return Psi


def _generator_table(gens, support, p) -> np.ndarray:
    from fractions import Fraction
    from math import lcm

    out = np.zeros((len(gens), len(support)))
    for g, e in enumerate(gens):
        den = 1
        for c in e.terms.values():
            den = lcm(den, c.denominator)
        for mi, m in enumerate(support):
            c = e.terms.get(m, Fraction(0)) * den
            out[g, mi] = int(c) % p
    out[out > p // 2] -= p
    return out


def _compressed_nullspace(blocks, u: int, p: int, seed: int) -> np.ndarray:
    """Null space of a tall streamed system, via a random sketch verified exactly."""
    if u == 0:
        return np.zeros((0, 0))
    for attempt in range(3):
        rng = np.random.default_rng([seed, p, u, attempt])
        rows = u + 16
        Ssk = np.zeros((rows, u))
        for E in blocks():
            G = rng.integers(-(p // 2), p // 2 + 1, size=(rows, E.shape[0])).astype(np.float64)
            Ssk += linalg.matmul_mod(G, E, p)
            linalg.reduce_mod(Ssk, p)
        X = linalg.nullspace_modp(Ssk, p)
        if X.shape[0] == 0:
            return X
        bad = False
        for E in blocks():
            R = linalg.matmul_mod(E, np.ascontiguousarray(X.T), p)
            if np.any(R):
                bad = True
                break
        if not bad:
            return X
    raise ArithmeticError("sketched null space failed verification repeatedly")


def _zero_dual(n: int, p):
    if p is not None:
        return np.zeros((0, n)), 0
    idx = np.arange(n)
    return SparseMatrix.build(n, n, idx, idx, np.ones(n)), 0


def quotient_one_field(theta: Face, gens, kmax: int, p: int | None, phi=None, seed: int = 0, audit=None) -> QuotientData:
    """Degrees 0..kmax over F_p, or over Q when ``p`` is None.

    Over F_p ``duals[k]`` is a basis of Q_k^* (rows over the degree-k monomials);
    over Q it is a sparse matrix whose rows span I_k.
    """
    dims: list[int] = []
    duals: list = []
    routes: list[str] = []
    for k in range(kmax + 1):
        n = len(lattice_point_array(theta, k))
        if k == 0:
            dual, h = (np.eye(1), 1) if p is not None else (SparseMatrix.zeros(0, 1), 1)
            route = "unit"
        elif dims[k - 1] == 0 and k >= max(2, theta.dim):
            # Q_{k-1} = 0 gives I_k = R_1 R_{k-1}.  At level >= dim(theta) every
            # point of a simplicial cell cone has an integral barycentric
            # coordinate >= 1, so nothing is indecomposable there.
            dual, h = _zero_dual(n, p)
            route = "vanishes"
        elif dims[k - 1] == 0 and k >= 2:
            cnt, indec = _indecomposable_count(theta, k, phi)
            if p is not None:
                dual = np.zeros((cnt, n))
                dual[np.arange(cnt), np.nonzero(indec)[0]] = 1.0
            else:
                dec = np.nonzero(~indec)[0]
                dual = SparseMatrix.build(len(dec), n, np.arange(len(dec)), dec, np.ones(len(dec)))
            h = cnt
            route = "indecomposables"
        elif n <= DIRECT_LIMIT:
            dual, h = _direct_dual(theta, gens, k, p, phi, seed, audit)
            route = "direct"
        elif p is not None:
            dual = _inverse_step(theta, gens, k - 1, duals[k - 1], p, phi, seed, audit)
            h = dual.shape[0]
            route = "inverse-system"
        else:
            raise BudgetError(f"exact quotient at degree {k} needs {n} columns (limit {DIRECT_LIMIT})")
        dims.append(int(h))
        duals.append(dual)
        routes.append(route)
    return QuotientData(theta, dims, duals, p, routes)


def modular_runs(theta: Face, gens, kmax: int, seed: int = 0, phi=None, audit=None, primes=None) -> list[QuotientData]:
    """Quotient data for three primes whose dimension vectors agree (escalating on disagreement)."""
    for round_ in range(ESCALATIONS + 1):
        ps = primes or linalg.random_primes(seed + 7919 * round_, 3)
        runs = [quotient_one_field(theta, gens, kmax, p, phi, seed, audit) for p in ps]
        if all(r.dims == runs[0].dims for r in runs):
            return runs
        log.warning("quotient dims disagree across primes: %s", [r.dims for r in runs])
        primes = None
    return [quotient_one_field(theta, gens, kmax, None, phi, seed, audit)]


_DATA_CACHE: dict = {}


def _cache_key(theta, f, mode, seed, phi):
    return (theta, f.canonical(), mode, seed, None if phi is None else (id(phi), phi.canonical()))


def quotient_data(theta: Face, f, kmax: int, mode: str = "modular", seed: int = 0, phi=None, audit=None) -> list[QuotientData]:
    """Quotient data through degree kmax, memoised in-process (a longer run serves shorter requests)."""
    if mode not in ("modular", "exact"):
        raise ValidationError(f"unknown mode {mode!r}")
    key = _cache_key(theta, f, mode, seed, phi)
    hit = _DATA_CACHE.get(key)
    if hit is not None and len(hit[0].dims) > kmax and audit is None:
        return [_truncate(d, kmax) for d in hit]
    gens = face_generators(theta, f)
    if mode == "exact":
        out = [quotient_one_field(theta, gens, kmax, None, phi, seed, audit)]
    else:
        out = modular_runs(theta, gens, kmax, seed, phi, audit)
    if hit is None or len(hit[0].dims) <= kmax:
        if len(_DATA_CACHE) > 512:
            _DATA_CACHE.clear()
        _DATA_CACHE[key] = out
    return out


def _truncate(d: QuotientData, kmax: int) -> QuotientData:
    return QuotientData(d.theta, d.dims[: kmax + 1], d.duals[: kmax + 1], d.field, d.routes[: kmax + 1])


def clear_cache() -> None:
    _DATA_CACHE.clear()


def quotient_graded_dims(K, f, kmax: int, mode: str = "modular", seed: int = 0, phi=None, audit=None) -> list[int]:
    """dim of (C[K]/(z_{n_1},...,z_{n_r}))_k for k = 0..kmax (K a cone or a face)."""
    from ..lattice_geometry import Cone, full_face

    if kmax < 0:
        raise ValidationError("kmax must be non-negative")
    theta = full_face(K) if isinstance(K, Cone) else K
    return list(quotient_data(theta, f, kmax, mode, seed, phi, audit)[0].dims)


def dual_rank_on(data: QuotientData, k: int, columns: np.ndarray) -> int:
    """dim of the image in Q_k of the monomials indexed by ``columns``."""
    columns = np.asarray(columns, dtype=np.int64)
    if len(columns) == 0 or data.dims[k] == 0:
        return 0
    D = data.duals[k]
    if data.field is None:
        n = D.cols
        E = SparseMatrix.build(len(columns), n, np.arange(len(columns)), columns, np.ones(len(columns)))
        both = SparseMatrix.vstack([D, E]) if D.rows else E
        base = n - data.dims[k]
        return linalg.rank_exact(both.to_scipy()) - base
    return linalg.rank_dense_modp(D[:, columns], data.field)


def to_scipy_int(mat: SparseMatrix) -> sp.csr_matrix:
    return mat.to_scipy()
