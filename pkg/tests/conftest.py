import numpy as np
import pytest

from mstring.boundary import TwoSlopeBoundary
from mstring.circle_map import build_map
from mstring.conjugacy import build_conjugacy

# Case A: slopes (1/3, -1/5) -> branch slopes l1 = 2 > l2 = 2/3.
# Case B: the reversed ordering, l1 = 2/3 < l2 = 2 (damped/decay case).
ALPHA_A, BETA_A = 1.0 / 3.0, -1.0 / 5.0
ALPHA_B, BETA_B = -1.0 / 5.0, 1.0 / 3.0

RHO_A = np.log(2.0) / np.log(3.0)


@pytest.fixture(scope="session")
def case_a():
    return TwoSlopeBoundary(ALPHA_A, BETA_A)


@pytest.fixture(scope="session")
def case_b():
    return TwoSlopeBoundary(ALPHA_B, BETA_B)


@pytest.fixture(scope="session")
def map_a(case_a):
    return build_map(case_a)


@pytest.fixture(scope="session")
def map_b(case_b):
    return build_map(case_b)


@pytest.fixture(scope="session")
def conj_a(map_a):
    return build_conjugacy(map_a)


@pytest.fixture(scope="session")
def conj_b(map_b):
    return build_conjugacy(map_b)
