from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.errors import ValidationError
from artifact.fock_grading import (
    FockMonomial,
    central_charge,
    enumerate_hb_zero,
    ha_closed_form,
    ha_eigenvalue,
    hb_eigenvalue,
    j0_eigenvalue,
    l1_eigenvalue,
    l_shift,
)

RANK = 3
DEG = (0, 0, 1)
vec = st.tuples(*[st.integers(-3, 3)] * RANK)
half = st.integers(0, 4).map(lambda k: Fraction(2 * k + 1, 2))


@st.composite
def monomials(draw):
    fm = draw(st.lists(st.tuples(vec, half), max_size=3, unique=True))
    fn = draw(st.lists(st.tuples(vec, half), max_size=3, unique=True))
    bm = draw(st.lists(st.tuples(vec, st.integers(1, 3)), max_size=3))
    bn = draw(st.lists(st.tuples(vec, st.integers(1, 3)), max_size=3))
    return FockMonomial.make(draw(vec), draw(vec), bm, bn, fm, fn)


@settings(max_examples=200, deadline=None)
@given(monomials())
def test_grading_identities(v):
    la, lb = ha_eigenvalue(v, DEG, DEG), hb_eigenvalue(v, DEG, DEG)
    assert la + lb == 2 * l1_eigenvalue(v, DEG, DEG)
    assert la - lb == -j0_eigenvalue(v, DEG, DEG)
    assert la == ha_closed_form(v, DEG, DEG)


@settings(max_examples=200, deadline=None)
@given(monomials())
def test_eigenvalues_are_integers_on_lattice_grounds(v):
    assert ha_eigenvalue(v, DEG, DEG).denominator == 1
    assert hb_eigenvalue(v, DEG, DEG).denominator == 1


def test_same_mode_in_both_fermion_families_counts_twice():
    e = (1, 0, 0)
    v = FockMonomial.make((0, 0, 0), (0, 0, 0), ferm_m=[(e, "1/2")], ferm_n=[(e, "1/2")])
    assert v.mode_sum() == 1


@pytest.mark.parametrize(
    "kwargs",
    [{"bos_m": [((1, 0, 0), 0)]}, {"ferm_n": [((1, 0, 0), 1)]}, {"ferm_m": [((1, 0, 0), "1/2"), ((1, 0, 0), "1/2")]}],
)
def test_invalid_modes(kwargs):
    with pytest.raises(ValidationError):
        FockMonomial.make((0, 0, 0), (0, 0, 0), **kwargs)


def test_central_charge(elliptic, quintic):
    assert central_charge(elliptic) == 1
    assert central_charge(quintic) == 3


def test_l_shift():
    assert l_shift((1, 2, 3), (1, 0, 1)) == Fraction(9, 2)


def test_census_elliptic(elliptic):
    c = enumerate_hb_zero(elliptic, 2, 2)
    assert c.match
    assert c.fock[(1, 1)] == 8 * 12
    assert c.identities_checked > 0
