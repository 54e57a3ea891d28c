import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semifix.equivalence import (
    CONSISTENT,
    FALSIFIED,
    composed_triangle_bound_check,
    equivalence_diagnostic,
    lipschitz_modulus_exact,
    lipschitz_modulus_table,
)
from semifix.errors import ShapeError
from semifix.spaces import make_builtin_space, materialize, random_semimetric_matrix

from . import oracles
from .conftest import THREE, space_pairs

POINTS = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5]
LINE6 = materialize(make_builtin_space("real_line_abs"), POINTS).matrix
SQUARE6 = materialize(make_builtin_space("real_line_power_p", {"p": 2}), POINTS).matrix


def test_modulus_identity_on_attained_values():
    for v in oracles.attained(THREE):
        assert lipschitz_modulus_exact(THREE, THREE, v) == v


def test_modulus_square_vs_line():
    assert lipschitz_modulus_exact(LINE6, SQUARE6, 0.25) == 0.5 == oracles.lipschitz(LINE6.tolist(), SQUARE6.tolist(), 0.25)
    # L(t) = sqrt(t) on attained values
    for t in np.unique(SQUARE6):
        assert lipschitz_modulus_exact(LINE6, SQUARE6, t) == pytest.approx(np.sqrt(t), rel=1e-15)


def test_modulus_at_zero_and_infinity():
    assert lipschitz_modulus_exact(LINE6, SQUARE6, 0) == 0
    assert lipschitz_modulus_exact(LINE6, SQUARE6, float("inf")) == 2.5


def test_modulus_carrier_mismatch():
    with pytest.raises(ShapeError):
        lipschitz_modulus_exact(THREE, LINE6, 1.0)


def test_table_rounds_up_between_levels():
    table = lipschitz_modulus_table(LINE6, SQUARE6)
    # 0.3 lies between the attained 0.25 and 1.0, read at 1.0
    assert table(0.3) == 1.0
    assert table(100.0) == 2.5
    assert table(0.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(space_pairs())
def test_table_matches_oracle(pair):
    d1, d2 = pair
    table = lipschitz_modulus_table(d1, d2)
    for t, value in table.rows():
        assert value == oracles.lipschitz(d1.tolist(), d2.tolist(), t) == lipschitz_modulus_exact(d1, d2, t)


@settings(max_examples=100, deadline=None)
@given(space_pairs())
def test_modulus_dominates_d1(pair):
    d1, d2 = pair
    L = lipschitz_modulus_table(d1, d2)
    assert np.all(d1 <= L(d2))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_modulus_composition(n, seed):
    g = np.random.default_rng(seed)
    d1, d2, d3 = (random_semimetric_matrix(n, g) for _ in range(3))
    L12 = lipschitz_modulus_table(d1, d2)
    for t in np.unique(d3):
        assert lipschitz_modulus_exact(d1, d3, t) <= L12(lipschitz_modulus_exact(d2, d3, t))


def test_diagnostic_line_vs_square():
    grid = np.unique(SQUARE6)[1:]
    report = equivalence_diagnostic(LINE6, SQUARE6, grid)
    assert report.verdict == CONSISTENT
    assert report.forward.values[0] == 0.5 and report.backward.values[0] == 0.0


def test_diagnostic_identical():
    report = equivalence_diagnostic(LINE6, LINE6, [0.5, 1.0, 1.5])
    assert report.verdict == CONSISTENT
    assert report.forward.values == [0.5, 1.0, 1.5] == report.backward.values


def test_diagnostic_discrete_boundary_case():
    # line sample of diameter 10 against the discrete metric
    line = materialize(make_builtin_space("real_line_abs"), np.linspace(0, 10, 6)).matrix
    disc = make_builtin_space("discrete_ultrametric", {"n": 6}).matrix
    # at scales >= 1 every pair qualifies: a positive plateau at 10
    coarse = equivalence_diagnostic(line, disc, [1.0, 2.0, 3.0])
    assert coarse.verdict == FALSIFIED and coarse.forward.values == [10.0] * 3
    # below 1 only diagonal pairs qualify and the curve drops to 0
    fine = equivalence_diagnostic(line, disc, [0.25, 0.5, 0.75])
    assert fine.forward.values == [0.0] * 3
    assert fine.verdict == CONSISTENT
    assert any("smallest" in note for note in fine.notes)


def test_diagnostic_empty_grid():
    with pytest.raises(ValueError):
        equivalence_diagnostic(LINE6, SQUARE6, [])


def test_composed_bound_identical():
    assert composed_triangle_bound_check(THREE, THREE) == []
    assert composed_triangle_bound_check(LINE6, LINE6, brute_force=True) == []


def test_composed_bound_line_vs_square():
    assert composed_triangle_bound_check(LINE6, SQUARE6) == []
    assert composed_triangle_bound_check(SQUARE6, LINE6) == []
    assert composed_triangle_bound_check(LINE6, SQUARE6, brute_force=True) == []


@settings(max_examples=100, deadline=None)
@given(space_pairs(min_n=8, max_n=8))
def test_composed_bound_random_pairs(pair):
    d1, d2 = pair
    assert composed_triangle_bound_check(d1, d2) == []
    assert composed_triangle_bound_check(d1, d2, brute_force=True) == []
