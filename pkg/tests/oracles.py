"""Independent reference computations.

Nothing here imports the package: hulls come from scipy, points from a box
scan, ranks from plain Fraction elimination.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from math import comb

import numpy as np
from scipy.spatial import ConvexHull

QUINTIC = [(4, -1, -1, -1), (-1, 4, -1, -1), (-1, -1, 4, -1), (-1, -1, -1, 4), (-1, -1, -1, -1)]
ELLIPTIC = [(2, -1), (-1, 2), (-1, -1)]


def _inequalities(vertices):
    """Rows (a, b) with a.x + b <= 0 on the polytope (full-dimensional only)."""
    V = np.array(vertices, dtype=float)
    return ConvexHull(V).equations


def box_points(vertices, k: int = 1):
    """Lattice points of k * conv(vertices) by scanning the bounding box."""
    V = np.array(vertices, dtype=np.int64) * k
    eq = _inequalities(vertices)
    lo, hi = V.min(axis=0), V.max(axis=0)
    out = []
    for x in product(*(range(int(a), int(b) + 1) for a, b in zip(lo, hi))):
        xs = np.array(x, dtype=float)
        if np.all(eq[:, :-1] @ xs + k * eq[:, -1] <= 1e-9):
            out.append(tuple(x))
    return out


def ehrhart_counts(vertices, kmax: int) -> list[int]:
    return [1] + [len(box_points(vertices, k)) for k in range(1, kmax + 1)]


def h_star(vertices) -> list[int]:
    """h*_i = sum_j (-1)^j C(d+1, j) L(i-j), i = 0..d."""
    d = len(vertices[0])
    L = ehrhart_counts(vertices, d)
    return [sum((-1) ** j * comb(d + 1, j) * L[i - j] for j in range(i + 1)) for i in range(d + 1)]


def fraction_rank(rows) -> int:
    M = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][c] != 0:
                t = M[i][c] / M[rank][c]
                M[i] = [a - t * b for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# Hodge numbers of anticanonical hypersurfaces for reflexive simplices


def _barycentric(vertices, x):
    V = np.array(vertices, dtype=float)
    A = np.vstack([V.T, np.ones(len(V))])
    return np.linalg.solve(A, np.append(np.array(x, dtype=float), 1.0))


def _relint_counts(vertices):
    """Number of lattice points in the relative interior of conv(S) for each vertex subset S."""
    counts: dict = {}
    for x in box_points(vertices):
        lam = _barycentric(vertices, x)
        S = frozenset(i for i, v in enumerate(lam) if v > 1e-9)
        counts[S] = counts.get(S, 0) + 1
    return counts


def polar_simplex(vertices):
    """w_j with <v_i, w_j> = -1 for i != j."""
    V = np.array(vertices, dtype=float)
    n = len(V)
    out = []
    for j in range(n):
        rows = [V[i] for i in range(n) if i != j]
        w = np.linalg.solve(np.array(rows), -np.ones(n - 1))
        out.append(tuple(int(round(x)) for x in w))
    return out


def hodge_total(vertices) -> int:
    """Sum of the Hodge numbers of a generic CY hypersurface for a reflexive simplex of dim 2 or 4."""
    d = len(vertices[0])
    dual = polar_simplex(vertices)
    n = len(vertices)
    lD, lDs = _relint_counts(vertices), _relint_counts(dual)
    star = lambda table, S: table.get(frozenset(S), 0)
    if d == 2:
        return 2 + 2 * star(lD, range(n))
    if d != 4:
        raise ValueError("only dimensions 2 and 4")
    everything = set(range(n))

    def h(A, Acount, Bcount):
        total = len(box_points(A)) - d - 1
        for S in combinations(range(n), n - 1):
            total -= star(Acount, S)
        for S in combinations(range(n), n - 2):
            total += star(Acount, S) * star(Bcount, everything - set(S))
        return total

    h21 = h(vertices, lD, lDs)
    h11 = h(dual, lDs, lD)
    return 4 + 2 * (h11 + h21)
