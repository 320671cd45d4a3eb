"""The oracles re-derive every frozen constant, and agree with the package where both are cheap."""

import frozen
import oracles
from artifact.koszul_homology.linalg import bareiss_rank


def test_hstar_values():
    assert tuple(oracles.h_star(oracles.QUINTIC)) == frozen.QUINTIC_HSTAR
    assert tuple(oracles.h_star(oracles.ELLIPTIC)) == frozen.ELLIPTIC_HSTAR
    assert sum(frozen.QUINTIC_HSTAR) == 625 and sum(frozen.ELLIPTIC_HSTAR) == 9


def test_ehrhart_counts():
    assert tuple(oracles.ehrhart_counts(oracles.QUINTIC, 4)) == frozen.QUINTIC_EHRHART


def test_hodge_totals():
    assert oracles.hodge_total(oracles.QUINTIC) == frozen.QUINTIC_HODGE_TOTAL
    assert oracles.hodge_total(oracles.ELLIPTIC) == frozen.ELLIPTIC_HODGE_TOTAL
    assert sum(frozen.QUINTIC_FACE_SPLIT.values()) == frozen.QUINTIC_HODGE_TOTAL
    assert sum(frozen.QUINTIC_BY_W.values()) == frozen.QUINTIC_HODGE_TOTAL
    assert sum(frozen.ELLIPTIC_BY_W.values()) == frozen.ELLIPTIC_HODGE_TOTAL


def test_polar_simplex():
    assert sorted(oracles.polar_simplex(oracles.ELLIPTIC)) == [(-1, -1), (0, 1), (1, 0)]


def test_rank_oracles_agree():
    rows = [[2, 4, 6], [1, 2, 3], [0, 1, 1], [3, 7, 10]]
    assert oracles.fraction_rank(rows) == bareiss_rank(rows) == 2
