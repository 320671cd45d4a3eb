"""Eigenvalues of L_(1), J_(0), H_A and H_B on monomial Fock states.

States are symbolic: a ground state |m, n> with m in M and n in N, plus
multisets of creation modes.  Bosonic modes are positive integers, fermionic
modes positive half-integers.  ``deg`` lives in M and ``deg_star`` in N.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .errors import BudgetError, ValidationError
from .lattice_geometry import GorensteinPair, Vector, dot, full_face, lattice_point_array

HALF = Fraction(1, 2)
CENSUS_LIMIT = 2_000_000


def _vec(v) -> Vector:
    return tuple(int(x) for x in v)


@dataclass(frozen=True)
class FockMonomial:
    ground_m: Vector
    ground_n: Vector
    bos_m: tuple = ()  # ((vector, mode), ...) sorted multiset
    bos_n: tuple = ()
    ferm_m: frozenset = field(default_factory=frozenset)  # {(vector, half-integer mode)}
    ferm_n: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.ground_m) != len(self.ground_n):
            raise ValidationError("ground state components have different ranks")
        for _, i in self.bos_m + self.bos_n:
            if int(i) != i or i <= 0:
                raise ValidationError("bosonic modes must be positive integers")
        for _, i in list(self.ferm_m) + list(self.ferm_n):
            i = Fraction(i)
            if i <= 0 or i.denominator != 2:
                raise ValidationError("fermionic modes must be positive odd multiples of 1/2")

    @staticmethod
    def make(ground_m, ground_n, bos_m=(), bos_n=(), ferm_m=(), ferm_n=()) -> "FockMonomial":
        bm = tuple(sorted((_vec(v), int(i)) for v, i in bos_m))
        bn = tuple(sorted((_vec(v), int(i)) for v, i in bos_n))
        fm = [(_vec(v), Fraction(i)) for v, i in ferm_m]
        fn = [(_vec(v), Fraction(i)) for v, i in ferm_n]
        if len(set(fm)) != len(fm) or len(set(fn)) != len(fn):
            raise ValidationError("a fermionic mode appears twice (the state is zero)")
        return FockMonomial(_vec(ground_m), _vec(ground_n), bm, bn, frozenset(fm), frozenset(fn))

    def mode_sum(self) -> Fraction:
        ferm = [i for _, i in self.ferm_m] + [i for _, i in self.ferm_n]
        return Fraction(sum(i for _, i in self.bos_m + self.bos_n)) + sum(ferm, Fraction(0))


def l1_eigenvalue(v: FockMonomial, deg, deg_star) -> Fraction:
    return (
        dot(v.ground_m, v.ground_n)
        + HALF * dot(deg, v.ground_n)
        + HALF * dot(v.ground_m, deg_star)
        + v.mode_sum()
    )


def j0_eigenvalue(v: FockMonomial, deg, deg_star) -> int:
    return dot(deg, v.ground_n) - dot(v.ground_m, deg_star) + len(v.ferm_m) - len(v.ferm_n)


def ha_eigenvalue(v: FockMonomial, deg, deg_star) -> Fraction:
    return l1_eigenvalue(v, deg, deg_star) - HALF * j0_eigenvalue(v, deg, deg_star)


def hb_eigenvalue(v: FockMonomial, deg, deg_star) -> Fraction:
    return l1_eigenvalue(v, deg, deg_star) + HALF * j0_eigenvalue(v, deg, deg_star)


def ha_closed_form(v: FockMonomial, deg, deg_star) -> Fraction:
    """H_A written out: m.(deg* + n) + bosonic modes + sum(i' - 1/2) + sum(j' + 1/2)."""
    shifted = tuple(a + b for a, b in zip(deg_star, v.ground_n))
    out = Fraction(dot(v.ground_m, shifted))
    out += sum(i for _, i in v.bos_m + v.bos_n)
    out += sum((i - HALF for _, i in v.ferm_m), Fraction(0))
    out += sum((i + HALF for _, i in v.ferm_n), Fraction(0))
    return out


def central_charge(pair: GorensteinPair) -> int:
    return pair.rank - 2 * pair.index


def l_shift(m, n0) -> Fraction:
    """l_m = m.n0 + 1/2."""
    return dot(m, n0) + HALF


# ---------------------------------------------------------------------------
# census of the H_B = 0 subspace


def _mode_configurations(rank: int, cutoff: int):
    """Monomials on the ground (-deg, 0)-style zero ground built from basis vectors.

    Every creation operator costs at least 0 (n-fermion at 1/2) or at least 1
    (everything else) in H_B, so the configurations of cost <= cutoff are
    finite: n-fermions at 1/2 on any subset of the basis, plus at most
    ``cutoff`` further operators of unit cost.
    """
    basis = [tuple(int(i == j) for i in range(rank)) for j in range(rank)]
    cheap = [()]
    for p in range(1, rank + 1):
        cheap.extend(combinations(basis, p))
    unit_ops = []
    for e in basis:
        unit_ops.append(("bos_m", (e, 1)))
        unit_ops.append(("bos_n", (e, 1)))
        unit_ops.append(("ferm_m", (e, HALF)))
        unit_ops.append(("ferm_n", (e, Fraction(3, 2))))
    extras = [()]
    for c in range(1, cutoff + 1):
        extras.extend(combinations(unit_ops, c))
    for s in cheap:
        for ex in extras:
            kw = {"bos_m": [], "bos_n": [], "ferm_m": [], "ferm_n": [(e, HALF) for e in s]}
            for kind, op in ex:
                kw[kind].append(op)
            yield kw


@dataclass
class Census:
    fock: dict  # (a, b) -> count of H_B = 0 monomials
    complex_side: dict  # (a, b) -> sum_p C(rank, p) |L(a, b)|
    identities_checked: int

    @property
    def match(self) -> bool:
        return self.fock == self.complex_side

    def report(self) -> dict:
        keys = sorted(set(self.fock) | set(self.complex_side))
        return {
            "rows": [[a, b, self.fock.get((a, b), 0), self.complex_side.get((a, b), 0)] for a, b in keys],
            "match": self.match,
            "identities_checked": self.identities_checked,
        }


def enumerate_hb_zero(pair: GorensteinPair, a_max: int, b_max: int, cutoff: int = 1) -> Census:
    """Count H_B = 0 monomials of Fock_{(K-deg) + K*} by ground levels (a, b).

    The ground is |m - deg, n> with m in K at level a and n in K* at level b.
    Monomials of mode cost up to ``cutoff`` are enumerated and filtered by the
    eigenvalue formula; the counts are compared with |wedge N| x |L(a, b)|.
    """
    from .bring_complex import build_L_basis

    deg, deg_star = pair.deg, pair.deg_star
    rank = pair.rank
    configs = [FockMonomial.make((0,) * rank, (0,) * rank, **kw) for kw in _mode_configurations(rank, cutoff)]
    tK, tS = full_face(pair.K), full_face(pair.Kdual)
    fock: dict = {}
    side: dict = {}
    checked = 0
    for a in range(a_max + 1):
        Ma = lattice_point_array(tK, a)
        for b in range(b_max + 1):
            Nb = lattice_point_array(tS, b)
            if len(Ma) * len(Nb) * len(configs) > CENSUS_LIMIT * 50:
                raise BudgetError(f"census window ({a},{b}) too large")
            # H_B is additive: ground part plus mode part (evaluated on explicit states)
            G = Ma @ Nb.T  # (m - deg + deg) . n
            count = 0
            for c in configs:
                ground = FockMonomial(tuple(-x for x in deg), (0,) * rank, c.bos_m, c.bos_n, c.ferm_m, c.ferm_n)
                mode_part = hb_eigenvalue(ground, deg, deg_star)
                count += int(np.count_nonzero(G + mode_part == 0)) if mode_part.denominator == 1 else 0
            for i in range(min(len(Ma), 3)):
                for j in range(min(len(Nb), 3)):
                    for c in configs[:: max(1, len(configs) // 7)]:
                        v = FockMonomial(
                            tuple(int(x) - y for x, y in zip(Ma[i], deg)), _vec(Nb[j]), c.bos_m, c.bos_n, c.ferm_m, c.ferm_n
                        )
                        _check_identities(v, deg, deg_star)
                        checked += 1
            if count:
                fock[(a, b)] = count
            L = len(build_L_basis(pair, a, b))
            if L:
                side[(a, b)] = sum(comb(rank, p) for p in range(rank + 1)) * L
    return Census(fock, side, checked)


def _check_identities(v: FockMonomial, deg, deg_star) -> None:
    la, lb = ha_eigenvalue(v, deg, deg_star), hb_eigenvalue(v, deg, deg_star)
    L, J = l1_eigenvalue(v, deg, deg_star), j0_eigenvalue(v, deg, deg_star)
    if la + lb != 2 * L or la - lb != -J or la != ha_closed_form(v, deg, deg_star):
        raise ArithmeticError("grading identities fail")


__all__ = [
    "Census",
    "FockMonomial",
    "central_charge",
    "enumerate_hb_zero",
    "ha_closed_form",
    "ha_eigenvalue",
    "hb_eigenvalue",
    "j0_eigenvalue",
    "l1_eigenvalue",
    "l_shift",
]
