import numpy as np
import pytest
from hypothesis import strategies as st

from semifix.spaces import FiniteSpace, random_semimetric_matrix

THREE = [[0, 1, 3], [1, 0, 1], [3, 1, 0]]


@pytest.fixture
def three():
    return FiniteSpace(THREE)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@st.composite
def finite_spaces(draw, min_n=1, max_n=12):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return FiniteSpace(random_semimetric_matrix(n, np.random.default_rng(seed)))


@st.composite
def space_pairs(draw, min_n=2, max_n=8):
    """Two random semimetrics on one carrier."""
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    g = np.random.default_rng(seed)
    return random_semimetric_matrix(n, g), random_semimetric_matrix(n, g)
