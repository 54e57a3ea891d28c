import math

import numpy as np
import pytest
from hypothesis import given, settings

from semifix.errors import ModeError, PreconditionError
from semifix.extreal import INF
from semifix.spaces import FiniteSpace, make_builtin_space, random_finite_space
from semifix.triangle import (
    CInframetric,
    CRelaxed,
    Max,
    PthOrder,
    Sum,
    Tabulated,
    basic_triangle_exact,
    basic_triangle_table,
    check_optimality,
    eval_triangle,
    largest_attained_below,
    regularity_diagnostic,
    smallest_valid_constant,
    verify_triangle_function,
)

from . import oracles
from .conftest import THREE, finite_spaces


# --------------------------------------------------------------------------
# forms


@pytest.mark.parametrize(
    "form, u, v, expected",
    [
        (Sum(), 1, 2, 3),
        (CInframetric(2), 1, 3, 6),
        (PthOrder(2), 3, 4, 5),
        (Max(), 2, 7, 7),
        (CRelaxed(1.5), 1, 1, 3),
        (Sum(), INF, 1, INF),
        (PthOrder(0.5), 0, 0, 0),
    ],
)
def test_eval_triangle(form, u, v, expected):
    assert eval_triangle(form, u, v) == expected


@pytest.mark.parametrize("form", [Sum(), Max(), CRelaxed(2), CInframetric(3), PthOrder(0.5), PthOrder(3)])
def test_forms_symmetric_monotone_zero(form, rng):
    assert eval_triangle(form, 0, 0) == 0
    u, v = rng.uniform(0, 10, (2, 200))
    assert np.array_equal(form(u, v), form(v, u))
    assert np.all(form(u + 0.5, v) >= form(u, v))


def test_constants_below_one_rejected():
    with pytest.raises(ValueError):
        CRelaxed(0.5)
    with pytest.raises(ValueError):
        PthOrder(0)


def test_tabulated_rounds_up_and_is_infinite_beyond_grid():
    t = Tabulated([0, 1, 2], [0, 1, 2], [[0, 1, 2], [1, 3, 3], [2, 3, 4]])
    assert t(1, 1) == 3
    assert t(0.5, 0.2) == 3  # dominated by (1, 1)
    assert t(2.5, 0) == INF


# --------------------------------------------------------------------------
# basic triangle function


def test_basic_exact_three_point(three):
    # witness p=1, x=0, y=2
    assert basic_triangle_exact(three, 1, 1) == 3 == oracles.phi_basic(THREE, 1, 1)
    assert basic_triangle_exact(three, 0, 1) == 1 == oracles.phi_basic(THREE, 0, 1)
    assert basic_triangle_exact(three, 0, 0) == 0


def test_basic_exact_infinite_argument(three):
    assert basic_triangle_exact(three, INF, INF) == 3


def test_table_two_point():
    table = basic_triangle_table(FiniteSpace([[0, 1], [1, 0]]))
    rows = {(u, v): phi for u, v, phi in table.rows()}
    assert rows[(0, 0)] == 0 and rows[(0, 1)] == 1 and rows[(1, 1)] == 1


def test_table_three_point(three):
    assert basic_triangle_table(three).entry(1, 1) == 3


def test_table_discrete_matches_max():
    table = basic_triangle_table(make_builtin_space("discrete_ultrametric", {"n": 4}))
    assert table.entry(1, 1) == 1
    assert check_optimality(table, Max()) == []
    assert table.entry(1, 1) == eval_triangle(Max(), 1, 1)


@settings(max_examples=60, deadline=None)
@given(finite_spaces(max_n=7))
def test_table_matches_brute_force(space):
    table = basic_triangle_table(space)
    D = space.matrix.tolist()
    for u, v, phi in table.rows():
        assert phi == oracles.phi_basic(D, u, v) == basic_triangle_exact(space, u, v)


@settings(max_examples=100, deadline=None)
@given(finite_spaces())
def test_basic_triangle_monotone(space):
    t = basic_triangle_table(space)
    assert np.all(np.diff(t.values, axis=0) >= 0)
    assert np.all(np.diff(t.values, axis=1) >= 0)
    assert np.array_equal(t.values, t.values.T)


@settings(max_examples=100, deadline=None)
@given(finite_spaces())
def test_table_is_least_triangle_function(space):
    table = basic_triangle_table(space)
    assert verify_triangle_function(space, table.as_form()) == []
    for family in ("crelaxed", "cinframetric"):
        c = smallest_valid_constant(space, family)
        form = CRelaxed(c) if family == "crelaxed" else CInframetric(c)
        assert check_optimality(table, form) == []


# --------------------------------------------------------------------------
# verification


def test_verify_sum_fails_on_three_point(three):
    found = {(v.x, v.y, v.z) for v in verify_triangle_function(three, Sum())}
    assert (0, 2, 1) in found
    assert found == set(oracles.triangle_violations(THREE, lambda a, b: a + b))


def test_verify_crelaxed_passes_on_three_point(three):
    assert verify_triangle_function(three, CRelaxed(2)) == []


def test_verify_power_space_sampled(rng):
    space = make_builtin_space("real_line_power_p", {"p": 2})
    assert verify_triangle_function(space, CRelaxed(2), "sample", k=10_000, rng=rng) == []
    # Sum does fail for the squared distance
    assert verify_triangle_function(space, Sum(), "sample", k=10_000, rng=rng)


def test_verify_exhaustive_on_continuum_is_mode_error():
    with pytest.raises(ModeError):
        verify_triangle_function(make_builtin_space("real_line_abs"), Sum(), "exhaustive")


def test_optimality_examples(three):
    assert check_optimality(basic_triangle_table(three), CRelaxed(2)) == []
    assert check_optimality(basic_triangle_table(FiniteSpace([[0, 1], [1, 0]])), Sum()) == []


def test_optimality_needs_verified_form(three):
    with pytest.raises(PreconditionError):
        check_optimality(basic_triangle_table(three), Sum())


def test_smallest_constant_is_tight(three):
    c = smallest_valid_constant(three, "crelaxed")
    assert c == 1.5  # 3 <= c * (1 + 1)
    assert verify_triangle_function(three, CRelaxed(math.nextafter(c, 0))) != []


# --------------------------------------------------------------------------
# regularity


def test_regularity_three_point(three):
    curve = regularity_diagnostic(three, [1.5])
    assert curve.values == [3.0] and curve.exactness == "exact"


def test_regularity_fan_space():
    N = 5
    space = make_builtin_space("nonregular_family_N", {"N": N})
    radii = [1 / i + 1e-9 for i in range(1, N + 1)]
    curve = regularity_diagnostic(space, radii)
    assert all(v >= 1 for v in curve.values)
    assert curve.params == sorted(radii)


def test_regularity_sampled_line(rng):
    curve = regularity_diagnostic(make_builtin_space("real_line_abs"), [0.1], rng=rng)
    assert curve.exactness == "lower-bound"
    assert curve.values[0] <= 0.2


def test_regularity_empty_grid(three):
    with pytest.raises(ValueError):
        regularity_diagnostic(three, [])


@settings(max_examples=50, deadline=None)
@given(finite_spaces(max_n=8))
def test_regularity_matches_oracle_and_basic_bound(space):
    D = space.matrix.tolist()
    radii = sorted(set(space.levels()[1:].tolist()) | {0.05, 1.0, 2.5})
    curve = regularity_diagnostic(space, radii)
    for r, value in zip(curve.params, curve.values):
        assert value == oracles.max_ball_diameter(D, r)
        below = largest_attained_below(space, r)
        assert value <= basic_triangle_exact(space, below, below)


def test_random_spaces_seeded():
    a = random_finite_space(5, np.random.default_rng(3)).matrix
    b = random_finite_space(5, np.random.default_rng(3)).matrix
    assert np.array_equal(a, b)
