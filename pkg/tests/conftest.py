import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from artifact import semigroup_ring as sr
from artifact.lattice_geometry import full_face, lattice_points, make_polytope, pair_from_polytope, preset_pair


@pytest.fixture(scope="session")
def quintic():
    return preset_pair("quintic")


@pytest.fixture(scope="session")
def elliptic():
    return preset_pair("elliptic")


def coeffs(cone, seed):
    return sr.sample_coefficients(lattice_points(full_face(cone), 1), seed)


def fermat(cone):
    return sr.fermat_coefficients(lattice_points(full_face(cone), 1))


# weight systems (1, w1, w2, w3) whose simplex e1, e2, e3, -(w1, w2, w3) is reflexive
SIMPLEX_WEIGHTS = [(1, 1, 1), (1, 2, 2), (1, 1, 3)]


def random_reflexive_simplex(seed: int):
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(SIMPLEX_WEIGHTS))
    for i in order:
        w = SIMPLEX_WEIGHTS[i]
        P = make_polytope([(1, 0, 0), (0, 1, 0), (0, 0, 1), tuple(-x for x in w)])
        if P.is_reflexive():
            return w, pair_from_polytope(P)
    raise AssertionError("no reflexive simplex in the list")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.LINES:
        terminalreporter.section("acceptance")
        for line in mod.LINES:
            terminalreporter.write_line(line)
