from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from artifact import semigroup_ring as sr
from artifact.errors import ValidationError
from artifact.lattice_geometry import full_face, interior_lattice_points, lattice_points
from conftest import coeffs


def _points(pair):
    return lattice_points(full_face(pair.K), 1)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3), st.lists(st.integers(-3, 3), min_size=3, max_size=3),
       st.integers(0, 50))
def test_z_element_is_linear(elliptic, n, n2, seed):
    f = coeffs(elliptic.K, seed)
    total = sr.z_element(f, [a + b for a, b in zip(n, n2)])
    assert total.terms == (sr.z_element(f, n) + sr.z_element(f, n2)).terms


@pytest.mark.parametrize("k", [1, 2, 3])
def test_interior_multiplication_is_injective(elliptic, k):
    theta = full_face(elliptic.K)
    e = sr.monomial(interior_lattice_points(theta, 1)[0])
    A = sr.multiplication_matrix(e, theta, k).to_scipy().toarray()
    assert oracles.fraction_rank(A.tolist()) == A.shape[0]


def test_multiplication_matches_definition(elliptic):
    theta = full_face(elliptic.K)
    f = coeffs(elliptic.K, 4)
    e = sr.z_element(f, (1, 0, 0))
    A = sr.multiplication_matrix(e, theta, 1).to_scipy().toarray()
    src = lattice_points(theta, 1)
    tgt = lattice_points(theta, 2)
    den = max(c.denominator for c in e.terms.values())
    for i, x in enumerate(src):
        expect = {}
        for m, c in e.terms.items():
            y = tuple(a + b for a, b in zip(x, m))
            expect[y] = expect.get(y, 0) + c * den
        row = {tgt[j]: A[i, j] for j in np.nonzero(A[i])[0]}
        assert row == {y: v for y, v in expect.items() if v}


@pytest.fixture(scope="module")
def elliptic_triangulation(elliptic):
    return sr.random_triangulation(_points(elliptic), 5, degree_vector=elliptic.K.degree_vector)


def test_partial_product_associative(elliptic, elliptic_triangulation):
    phi = elliptic_triangulation
    pts = _points(elliptic)
    for x, y, z in product(pts, repeat=3):
        xy = sr.partial_product(x, y, phi)
        yz = sr.partial_product(y, z, phi)
        left = None if xy is None else sr.partial_product(xy, z, phi)
        right = None if yz is None else sr.partial_product(x, yz, phi)
        assert left == right


def test_triangulation_covers_and_is_concave(elliptic, elliptic_triangulation):
    phi = elliptic_triangulation
    pts = list(lattice_points(full_face(elliptic.K), 2))
    assert phi.membership(np.array(pts)).any(axis=1).all()
    rng = np.random.default_rng(0)
    ones = _points(elliptic)
    for _ in range(60):
        x = ones[rng.integers(len(ones))]
        y = ones[rng.integers(len(ones))]
        s = tuple(a + b for a, b in zip(x, y))
        lhs, rhs = phi.h_value(s), phi.h_value(x) + phi.h_value(y)
        assert lhs >= rhs
        assert (lhs == rhs) == phi.same_cell(x, y)


def test_pulling_triangulation_is_a_star(quintic):
    pts = _points(quintic)
    apex = pts[len(pts) // 2]
    T = sr.pulling_triangulation(pts, apex, 0, degree_vector=quintic.K.degree_vector)
    a = pts.index(apex)
    assert all(a in c for c in T.cells)
    assert T.is_simplicial()


def test_equal_heights_give_one_cell(elliptic):
    simplex = list(elliptic.Kdual.rays)
    T = sr.regular_triangulation(simplex, [0] * len(simplex), perturb=False,
                                 degree_vector=elliptic.Kdual.degree_vector)
    assert len(T.cells) == 1


def test_coefficient_file_roundtrip(elliptic):
    f = coeffs(elliptic.K, 9).with_values([Fraction(i, 3) for i in range(10)])
    text = sr.format_coefficients(f, drop_last=True)
    assert sr.parse_coefficients(text, f.points) == f


@pytest.mark.parametrize("text", ["0 0 1 = 3\n", "0 0 1 : x\n", "9 9 1 : 1\n"])
def test_coefficient_file_errors(elliptic, text):
    with pytest.raises(ValidationError):
        sr.parse_coefficients(text, _points(elliptic))


def test_seeded_coefficients_are_reproducible(elliptic):
    assert coeffs(elliptic.K, 3) == coeffs(elliptic.K, 3)
    assert coeffs(elliptic.K, 3) != coeffs(elliptic.K, 4)
