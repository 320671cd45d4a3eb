"""Rank kernel: dense elimination over F_p on top of float64 BLAS, plus exact checks.

Residues are stored balanced in [-(p-1)/2, (p-1)/2] inside float64 arrays.  With
p < 2**23 a product of two residues stays below 2**44, so up to 256 of them can
be summed exactly before a reduction; matrix products are chunked accordingly.
Elimination is a recursive column-split LU with row pivoting (partial pivoting,
rank revealing through skipped columns); the leaves and triangular-solve leaves
are numba loops, everything else is ``numpy.matmul``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from numba import njit

LEAF = 32
CHUNK = 256
PRIME_LOW = 1 << 22
PRIME_HIGH = 1 << 23


# ---------------------------------------------------------------------------
# primes


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_primes(seed: int, count: int, low: int = PRIME_LOW, high: int = PRIME_HIGH) -> list[int]:
    """``count`` distinct primes in [low, high), deterministic in ``seed``."""
    rng = np.random.default_rng([0x5EED, seed])
    out: list[int] = []
    while len(out) < count:
        c = int(rng.integers(low, high)) | 1
        while not is_probable_prime(c):
            c += 2
            if c >= high:
                c = low | 1
        if c not in out:
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# modular helpers on balanced float arrays


def reduce_mod(X: np.ndarray, p: int) -> np.ndarray:
    X -= p * np.rint(X / p)
    return X


def to_residues(X, p: int) -> np.ndarray:
    """Balanced float64 residues of an integer array (object or int64)."""
    X = np.asarray(X)
    if X.dtype == object:
        X = np.vectorize(lambda v: int(v) % p, otypes=[np.int64])(X)
    R = np.mod(X.astype(np.int64), p)
    R = R.astype(np.float64)
    R[R > p // 2] -= p
    return R


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    k = A.shape[1]
    if k == 0:
        return np.zeros((A.shape[0], B.shape[1]))
    out = None
    for s in range(0, k, CHUNK):
        part = A[:, s : s + CHUNK] @ B[s : s + CHUNK]
        if out is None:
            out = part
        else:
            out += part
        reduce_mod(out, p)
    return out


@njit(cache=True)
def _inv_mod(a, p):
    a %= p
    t, newt, r, newr = 0, 1, p, a
    while newr != 0:
        q = r // newr
        t, newt = newt, t - q * newt
        r, newr = newr, r - q * newr
    if t < 0:
        t += p
    return t


@njit(cache=True)
def _bal(x, p):
    x %= p
    if x > p // 2:
        x -= p
    return x


@njit(cache=True)
def _panel(A, r0, c0, c1, p):
    m, n = A.shape
    piv = np.empty(c1 - c0, np.int64)
    k = 0
    r = r0
    for j in range(c0, c1):
        if r >= m:
            break
        ip = -1
        for i in range(r, m):
            if A[i, j] != 0.0:
                ip = i
                break
        if ip < 0:
            continue
        if ip != r:
            for jj in range(n):
                t = A[r, jj]
                A[r, jj] = A[ip, jj]
                A[ip, jj] = t
        inv = _inv_mod(np.int64(A[r, j]), p)
        for i in range(r + 1, m):
            a = A[i, j]
            if a != 0.0:
                l = _bal(np.int64(a) * inv, p)
                A[i, j] = l
                for jj in range(j + 1, c1):
                    v = A[r, jj]
                    if v != 0.0:
                        A[i, jj] = _bal(np.int64(A[i, jj]) - l * np.int64(v), p)
        piv[k] = j
        k += 1
        r += 1
    return piv[:k]


@njit(cache=True)
def _trsm_lower_leaf(L, B, p):
    k = L.shape[0]
    w = B.shape[1]
    for i in range(k):
        for j in range(i):
            l = np.int64(L[i, j])
            if l != 0:
                for c in range(w):
                    B[i, c] = _bal(np.int64(B[i, c]) - l * np.int64(B[j, c]), p)
    return B


@njit(cache=True)
def _trsm_upper_leaf(U, B, p):
    k = U.shape[0]
    w = B.shape[1]
    for i in range(k - 1, -1, -1):
        for j in range(i + 1, k):
            u = np.int64(U[i, j])
            if u != 0:
                for c in range(w):
                    B[i, c] = _bal(np.int64(B[i, c]) - u * np.int64(B[j, c]), p)
        inv = _inv_mod(np.int64(U[i, i]), p)
        for c in range(w):
            B[i, c] = _bal(np.int64(B[i, c]) * inv, p)
    return B


def _trsm_lower_unit(L: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """Solve L X = B with L unit lower triangular (only the strict lower part is read)."""
    k = L.shape[0]
    if k <= LEAF:
        return _trsm_lower_leaf(np.ascontiguousarray(L), np.ascontiguousarray(B), p)
    h = k // 2
    X1 = _trsm_lower_unit(L[:h, :h], B[:h], p)
    B2 = B[h:] - matmul_mod(np.ascontiguousarray(L[h:, :h]), X1, p)
    reduce_mod(B2, p)
    X2 = _trsm_lower_unit(L[h:, h:], B2, p)
    return np.vstack([X1, X2])


def _trsm_upper(U: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """Solve U X = B with U upper triangular with invertible diagonal."""
    k = U.shape[0]
    if k <= LEAF:
        return _trsm_upper_leaf(np.ascontiguousarray(U), np.ascontiguousarray(B), p)
    h = k // 2
    X2 = _trsm_upper(U[h:, h:], B[h:], p)
    B1 = B[:h] - matmul_mod(np.ascontiguousarray(U[:h, h:]), X2, p)
    reduce_mod(B1, p)
    X1 = _trsm_upper(U[:h, :h], B1, p)
    return np.vstack([X1, X2])


def _factor(A: np.ndarray, r0: int, c0: int, c1: int, p: int, piv: list) -> int:
    m = A.shape[0]
    if r0 >= m or c0 >= c1:
        return 0
    if c1 - c0 <= LEAF:
        found = _panel(A, r0, c0, c1, p)
        piv.extend(int(j) for j in found)
        return len(found)
    mid = c0 + (c1 - c0) // 2
    start = len(piv)
    k1 = _factor(A, r0, c0, mid, p, piv)
    if k1:
        pc = np.array(piv[start : start + k1])
        L11 = A[r0 : r0 + k1][:, pc]
        X = _trsm_lower_unit(L11, np.array(A[r0 : r0 + k1, mid:c1]), p)
        A[r0 : r0 + k1, mid:c1] = X
        step = 4096
        for s in range(r0 + k1, m, step):
            e = min(s + step, m)
            L21 = np.ascontiguousarray(A[s:e][:, pc])
            block = A[s:e, mid:c1]
            block -= matmul_mod(L21, X, p)
            reduce_mod(block, p)
    k2 = _factor(A, r0 + k1, mid, c1, p, piv)
    return k1 + k2


def echelon_modp(A: np.ndarray, p: int) -> tuple[int, list[int]]:
    """In-place row echelon form; returns (rank, pivot columns)."""
    piv: list[int] = []
    r = _factor(A, 0, 0, A.shape[1], p, piv)
    return r, piv


def nullspace_modp(A: np.ndarray, p: int) -> np.ndarray:
    """Basis (rows) of {x : A x = 0} over F_p; A is destroyed."""
    m, n = A.shape
    r, piv = echelon_modp(A, p)
    free = np.setdiff1d(np.arange(n), np.array(piv, dtype=np.int64))
    h = len(free)
    X = np.zeros((h, n))
    if h == 0:
        return X
    X[np.arange(h), free] = 1.0
    if r:
        P = np.array(piv)
        T = np.triu(A[:r][:, P])
        Y = -A[:r][:, free]
        sol = _trsm_upper(T, Y, p)
        X[:, P] = sol.T
    return X


def rank_dense_modp(A: np.ndarray, p: int) -> int:
    B = np.array(A, dtype=np.float64)
    if B.shape[0] < B.shape[1]:
        B = np.ascontiguousarray(B.T)
    return echelon_modp(B, p)[0] if B.size else 0


def rref_modp(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of a small matrix over F_p (int64 Gauss-Jordan).

    Returns the nonzero rows (as balanced residues) and their pivot columns.
    """
    M = np.mod(np.asarray(A, dtype=np.float64).astype(np.int64), p)
    rows, cols = M.shape
    piv: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(M[r:, c])[0]
        if len(nz) == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        others = np.nonzero(M[:, c])[0]
        others = others[others != r]
        if len(others):
            M[others] = (M[others] - np.outer(M[others, c], M[r]) % p) % p
        piv.append(c)
        r += 1
    return to_residues(M[:r], p), piv


# ---------------------------------------------------------------------------
# sparse driver


def left_nullspace_modp(A: sp.spmatrix, p: int, seed: int = 0, slack: int = 32) -> np.ndarray:
    """Rows spanning {y : y A = 0} over F_p for an integer sparse matrix A.

    A random column subset (a little larger than the row count) is eliminated
    densely; the candidate null space is then checked against every column and
    cut down exactly, so the subset only affects speed, never the result.
    """
    A = sp.csc_matrix(A)
    n, m = A.shape
    if n == 0:
        return np.zeros((0, 0))
    Ar = A.copy()
    Ar.data = np.mod(Ar.data.astype(np.int64), p)
    if m == 0:
        return np.eye(n)
    if m > n + slack:
        rng = np.random.default_rng([seed, p, n, m])
        cols = np.sort(rng.choice(m, size=n + slack, replace=False))
        sub = Ar[:, cols]
    else:
        cols = None
        sub = Ar
    B = to_residues(sub.T.toarray(), p)
    X = nullspace_modp(B, p)
    if cols is None or X.shape[0] == 0:
        return X
    C = _rowvec_times_sparse(X, Ar, p)
    if np.any(C):
        Y = nullspace_modp(np.ascontiguousarray(C.T), p)
        X = matmul_mod(Y, X, p)
    return X


def _rowvec_times_sparse(X: np.ndarray, A: sp.spmatrix, p: int) -> np.ndarray:
    """(X @ A) mod p with exact int64 accumulation (A already reduced mod p)."""
    Xi = np.mod(X.astype(np.int64), p)
    At = sp.csr_matrix(A.T)
    out = np.empty((X.shape[0], A.shape[1]), dtype=np.int64)
    nnz_row = int(np.diff(At.indptr).max()) if At.nnz else 0
    if nnz_row * (p - 1) ** 2 >= 2**62:
        raise OverflowError("column too dense for exact int64 accumulation")
    for s in range(0, X.shape[0], 256):
        blk = Xi[s : s + 256].T
        out[s : s + 256] = np.mod(At @ blk, p).T
    return to_residues(out, p)


def rank_sparse_modp(A: sp.spmatrix, p: int, seed: int = 0) -> int:
    A = sp.csc_matrix(A)
    n, m = A.shape
    if n == 0 or m == 0 or A.nnz == 0:
        return 0
    if n > m:
        A = sp.csc_matrix(A.T)
        n, m = m, n
    X = left_nullspace_modp(A, p, seed)
    return n - X.shape[0]


def batched_rank_modp(A: np.ndarray, p: int) -> np.ndarray:
    """Ranks mod p of a stack of small matrices A[b] (all of one shape)."""
    A = np.mod(np.asarray(A, dtype=np.int64), p)
    if A.ndim != 3:
        raise ValueError("expected a 3-d stack")
    if A.shape[2] > A.shape[1]:
        A = np.ascontiguousarray(A.transpose(0, 2, 1))
    nb, r, c = A.shape
    used = np.zeros((nb, r), dtype=bool)
    idx = np.arange(nb)
    for j in range(c):
        cand = (A[:, :, j] != 0) & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        b = idx[has]
        piv = np.argmax(cand[has], axis=1)
        prow = A[b, piv, :]  # (k, c)
        pval = prow[:, j][:, None, None]
        # row_i <- pval * row_i - a_ij * pivot row (keeps the row space, clears column j)
        sub = A[b]
        a = sub[:, :, j][:, :, None]
        sub = np.mod(pval * sub - a * prow[:, None, :], p)
        sub[np.arange(len(b)), piv, :] = prow
        A[b] = sub
        used[b, piv] = True
    return used.sum(axis=1)


def block_rank(A: sp.spmatrix, row_labels: np.ndarray, col_labels: np.ndarray, mode: str = "modular",
               seed: int = 0, primes: int = 3) -> int:
    """Rank of a matrix that is block diagonal with respect to the given row and column labels.

    Blocks are grouped by shape and eliminated together; entries joining
    different labels are an error.  In exact mode enough primes are used
    that their product beats the Hadamard bound of every block.
    """
    A = sp.coo_matrix(A)
    if A.nnz == 0:
        return 0
    if np.any(row_labels[A.row] != col_labels[A.col]):
        raise ValueError("matrix is not block diagonal for these labels")
    comps = np.unique(row_labels[A.row])
    total = 0
    r_sizes = np.bincount(row_labels, minlength=comps.max() + 1)
    c_sizes = np.bincount(col_labels, minlength=comps.max() + 1)
    r_pos = _local_positions(row_labels)
    c_pos = _local_positions(col_labels)
    shapes = np.stack([r_sizes[comps], c_sizes[comps]], axis=1)
    order = np.lexsort((shapes[:, 1], shapes[:, 0]))
    comps, shapes = comps[order], shapes[order]
    slot = np.full(comps.max() + 1, -1, dtype=np.int64)
    start = 0
    while start < len(comps):
        stop = start
        while stop < len(comps) and tuple(shapes[stop]) == tuple(shapes[start]):
            stop += 1
        group = comps[start:stop]
        nr, nc = (int(x) for x in shapes[start])
        slot[group] = np.arange(len(group))
        sel = np.nonzero(slot[row_labels[A.row]] >= 0)[0]
        sel = sel[np.isin(row_labels[A.row[sel]], group)]
        dense = np.zeros((len(group), nr, nc), dtype=np.int64)
        np.add.at(dense, (slot[row_labels[A.row[sel]]], r_pos[A.row[sel]], c_pos[A.col[sel]]),
                  A.data[sel].astype(np.int64))
        slot[group] = -1
        total += _group_rank(dense, mode, seed, primes)
        start = stop
    return int(total)


def _local_positions(labels: np.ndarray) -> np.ndarray:
    order = np.argsort(labels, kind="stable")
    sl = labels[order]
    first = np.searchsorted(sl, sl, side="left")
    pos = np.empty(len(labels), dtype=np.int64)
    pos[order] = np.arange(len(labels)) - first
    return pos


def _group_rank(dense: np.ndarray, mode: str, seed: int, primes: int) -> int:
    if mode == "exact":
        sq = (dense.astype(np.float64) ** 2).sum(axis=2)
        with np.errstate(divide="ignore"):
            bound = float(np.where(sq > 0, 0.5 * np.log2(np.maximum(sq, 1)), 0).sum(axis=1).max())
        need = int(bound // 22) + 2
        ranks = np.zeros(len(dense), dtype=np.int64)
        for p in random_primes(seed + 104729, need):
            ranks = np.maximum(ranks, batched_rank_modp(dense, p))
        return int(ranks.sum())
    for round_ in range(3):
        got = [batched_rank_modp(dense, p) for p in random_primes(seed + 7919 * round_, primes)]
        if all(np.array_equal(got[0], g) for g in got[1:]):
            return int(got[0].sum())
    return _group_rank(dense, "exact", seed, primes)


# ---------------------------------------------------------------------------
# exact side (flint)


def _to_fmpz(A):
    import flint

    if sp.issparse(A):
        A = sp.coo_matrix(A)
        M = flint.fmpz_mat(A.shape[0], A.shape[1])
        for i, j, v in zip(A.row, A.col, A.data):
            M[int(i), int(j)] = int(v)
        return M
    A = np.asarray(A)
    return flint.fmpz_mat([[int(v) for v in row] for row in A]) if A.size else flint.fmpz_mat(*A.shape)


FRACTION_FREE_LIMIT = 48
CERT_PRIME_START = 1 << 62


def _certificate_primes():
    p = CERT_PRIME_START - 1
    while True:
        if is_probable_prime(p):
            yield p
        p -= 2


def hadamard_log2(A: sp.spmatrix, size: int) -> float:
    """log2 of a bound on |minor| for all minors of the given size (largest row norms)."""
    A = sp.csr_matrix(A)
    sq = np.asarray(A.multiply(A).sum(axis=1), dtype=float).ravel()
    sq = np.sort(sq[sq > 0])[::-1][:size]
    return float(0.5 * np.log2(sq).sum()) if len(sq) else 0.0


def rank_exact(A) -> int:
    """Rank over Q.

    Small matrices use fraction-free elimination.  Larger ones use ranks modulo
    62-bit primes until their product exceeds the Hadamard bound of every
    (r+1)-minor, r the largest modular rank seen: an (r+1)-minor divisible by
    all those primes must then vanish, so r is the rational rank.
    """
    import flint

    if A.shape[0] == 0 or A.shape[1] == 0:
        return 0
    M = _to_fmpz(A)
    if min(A.shape) <= FRACTION_FREE_LIMIT:
        return M.rank()
    As = sp.csr_matrix(A) if sp.issparse(A) else sp.csr_matrix(np.asarray(A, dtype=np.float64))
    r, covered = -1, 0.0
    for p in _certificate_primes():
        rp = flint.nmod_mat(M, p).rank()
        if rp > r:
            r = rp
        covered += np.log2(float(p))
        if r == min(A.shape) or covered > hadamard_log2(As, r + 1) + 1:
            return r


def bareiss_rank(rows) -> int:
    """Fraction-free Gaussian elimination on a list of integer rows (pure Python)."""
    M = [list(map(int, r)) for r in rows]
    if not M:
        return 0
    m, n = len(M), len(M[0])
    r, prev = 0, 1
    for c in range(n):
        piv = next((i for i in range(r, m) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, m):
            for j in range(c + 1, n):
                M[i][j] = (M[i][j] * M[r][c] - M[i][c] * M[r][j]) // prev
            M[i][c] = 0
        prev = M[r][c]
        r += 1
        if r == m:
            break
    return r
