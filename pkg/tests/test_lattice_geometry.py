import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from artifact.errors import ValidationError
from artifact.lattice_geometry import (
    dot,
    dual_face,
    enumerate_faces,
    full_face,
    gorenstein_cone,
    interior_lattice_points,
    lattice_points,
    make_polytope,
    pair_from_polytope,
    parse_polytope,
    polar_dual,
    preset_polytope,
)

BASES = {
    2: [oracles.ELLIPTIC, [(1, 0), (0, 1), (-1, -1)], [(1, 0), (0, 1), (-1, 0), (0, -1)]],
    3: [[(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -1, -1)], [(1, 0, 0), (0, 1, 0), (0, 0, 1), (-1, -2, -2)]],
}


@st.composite
def unimodular(draw, n):
    """Product of a few elementary integer matrices."""
    M = np.eye(n, dtype=np.int64)
    for _ in range(draw(st.integers(0, 4))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if i == j:
            continue
        E = np.eye(n, dtype=np.int64)
        E[i, j] = draw(st.integers(-2, 2))
        M = M @ E
    return M


@st.composite
def reflexive(draw):
    n = draw(st.sampled_from([2, 3]))
    base = draw(st.sampled_from(BASES[n]))
    M = draw(unimodular(n))
    return make_polytope([tuple(int(x) for x in M @ np.array(v)) for v in base])


@settings(max_examples=25, deadline=None)
@given(reflexive())
def test_polar_dual_is_an_involution(P):
    assert set(polar_dual(polar_dual(P)).vertices) == set(P.vertices)


@settings(max_examples=15, deadline=None)
@given(reflexive())
def test_face_duality(P):
    pair = pair_from_polytope(P)
    rank = pair.rank
    for theta in enumerate_faces(pair.K).faces:
        d = dual_face(theta)
        assert theta.dim + d.dim == rank
        assert dual_face(d).generator_subset == theta.generator_subset


@settings(max_examples=15, deadline=None)
@given(reflexive())
def test_rays_have_level_one(P):
    pair = pair_from_polytope(P)
    assert all(dot(r, pair.deg_star) == 1 for r in pair.K.rays)
    assert all(dot(pair.deg, r) == 1 for r in pair.Kdual.rays)
    assert pair.index == 1


@settings(max_examples=10, deadline=None)
@given(reflexive())
def test_face_lattice_closed_under_intersection(P):
    K = gorenstein_cone(P)
    lat = enumerate_faces(K)
    subsets = {f.generator_subset for f in lat.faces}
    for a in lat.faces:
        for b in lat.faces:
            assert a.generator_subset & b.generator_subset in subsets
        for c in lat.incidence[a]:
            assert c.dim >= a.dim


@settings(max_examples=10, deadline=None)
@given(reflexive(), st.integers(1, 3))
def test_lattice_points_match_box_scan(P, k):
    K = gorenstein_cone(P)
    pts = {p[:-1] for p in lattice_points(full_face(K), k)}
    assert pts == set(oracles.box_points(list(P.vertices), k))


def test_quintic_ehrhart_counts():
    import frozen

    K = gorenstein_cone(preset_polytope("quintic"))
    counts = [len(lattice_points(full_face(K), k)) for k in range(5)]
    assert tuple(counts) == frozen.QUINTIC_EHRHART


def test_quintic_face_count_and_interior(quintic):
    assert len(enumerate_faces(quintic.K)) == 32
    assert interior_lattice_points(full_face(quintic.Kdual), 1) == [(0, 0, 0, 0, 1)]
    assert len(lattice_points(full_face(quintic.Kdual), 1)) == 6


def test_non_reflexive_square():
    P = make_polytope([(0, 0), (3, 0), (0, 3), (3, 3)])
    assert not P.is_reflexive()
    with pytest.raises(ValidationError):
        polar_dual(P)


@pytest.mark.parametrize("text,line", [("dim 2\n1 0\n1 x\n", 3), ("dimension 2\n", 1), ("dim 2\n1 2 3\n", 2)])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(ValidationError, match=f"line {line}"):
        parse_polytope(text)
