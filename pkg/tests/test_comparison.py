import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semifix.comparison import (
    Linear,
    Power,
    RationalDecay,
    TabulatedMonotone,
    check_below_identity,
    iterate,
    make_comparison,
    n_epsilon,
    verify_comparison,
)
from semifix.errors import ConfigurationError, IterationCapError

from .oracles import first_index

BUILTINS = [Linear(0.0), Linear(0.5), Linear(0.9), RationalDecay(0.5), RationalDecay(1.0), RationalDecay(2.0)]


def test_iterate_linear():
    assert iterate(Linear(0.5), 3, 8.0) == 1.0


def test_iterate_rational_matches_closed_form():
    # phi^n(t) = t / (1 + n t) for a = 1
    assert iterate(RationalDecay(1), 4, 1.0) == pytest.approx(1 / 5, rel=1e-15)
    phi = RationalDecay(1)
    assert iterate(phi, 4, 1.0) == phi(phi(phi(phi(1.0))))


@pytest.mark.parametrize("phi", BUILTINS)
def test_builtins_vanish_at_zero(phi):
    assert iterate(phi, 1, 0.0) == 0


@pytest.mark.parametrize("phi", BUILTINS)
def test_compositional_coherence(phi):
    for t in (1e-3, 0.7, 5.0, 300.0):
        for n in (1, 2, 7, 40):
            assert iterate(phi, n + 1, t) == phi(iterate(phi, n, t))


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(BUILTINS),
    st.integers(1, 30),
    st.floats(0, 1e6),
    st.floats(0, 1e6),
)
def test_iterate_monotone_in_t(phi, n, s, t):
    lo, hi = sorted((s, t))
    assert iterate(phi, n, lo) <= iterate(phi, n, hi)


def test_verify_linear_passes():
    assert verify_comparison(Linear(0.9), [1, 10], n_max=200, decay_tol=1e-6).verdict == "pass"


def test_verify_rational_undecided():
    # phi^10(1) = 1/11 stays above the tolerance
    report = verify_comparison(RationalDecay(1), [1], n_max=10, decay_tol=1e-6)
    assert report.verdict == "undecided" and report.undecided == [1.0]


def test_linear_one_not_constructible():
    with pytest.raises(ConfigurationError):
        Linear(1.0)


def test_verify_flags_nonmonotone_table():
    phi = TabulatedMonotone([0, 1, 2], [0, 0.5, 0.2])
    assert verify_comparison(phi, [1, 2]).verdict == "fail"


def test_verify_flags_positive_value_at_zero():
    phi = TabulatedMonotone([0, 1], [0.1, 0.5])
    report = verify_comparison(phi, [1])
    assert report.zero_value == 0.1 and report.verdict == "undecided"


def test_below_identity():
    assert check_below_identity(Linear(0.5), [0.1, 1, 100]) == []
    assert check_below_identity(RationalDecay(2), [0.5]) == []
    assert check_below_identity(TabulatedMonotone([0, 1], [0, 1]), [1]) == [1.0]
    with pytest.raises(ValueError):
        check_below_identity(Linear(0.5), [0.0])


@pytest.mark.parametrize("phi", BUILTINS + [Power(RationalDecay(1), 3)])
def test_builtins_below_identity_on_log_grid(phi):
    assert check_below_identity(phi, np.logspace(-6, 6, 50)) == []


def test_n_epsilon_examples():
    assert n_epsilon(Linear(0.5), 1, 0.1) == 4
    expected = first_index(lambda n: n >= 1 and 1 / (1 + n) < 0.01)
    assert n_epsilon(RationalDecay(1), 1, 0.01) == expected == 100
    assert n_epsilon(Linear(0.5), 1, 2) == 1


def test_n_epsilon_cap():
    with pytest.raises(IterationCapError):
        n_epsilon(RationalDecay(1), 1, 1e-9, n_cap=1000)


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from(BUILTINS[1:]),
    st.floats(1e-3, 1e3),
    st.floats(1e-3, 1e3),
    st.floats(1e-4, 1e-1),
    st.floats(1e-4, 1e-1),
)
def test_n_epsilon_monotonicity(phi, e1, e2, d1, d2):
    e_lo, e_hi = sorted((e1, e2))
    d_lo, d_hi = sorted((d1, d2))
    assert n_epsilon(phi, e_lo, d_lo) <= n_epsilon(phi, e_hi, d_lo)
    assert n_epsilon(phi, e_lo, d_hi) <= n_epsilon(phi, e_lo, d_lo)


def test_make_comparison():
    assert make_comparison({"variant": "linear", "q": 0.5}) == Linear(0.5)
    assert make_comparison({"variant": "rational_decay", "a": 2}) == RationalDecay(2.0)
    with pytest.raises(ConfigurationError):
        make_comparison({"variant": "cubic"})
    with pytest.raises(ConfigurationError):
        make_comparison({"variant": "linear"})
