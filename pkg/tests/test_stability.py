import math

import numpy as np
import pytest

from semifix.comparison import Linear
from semifix.contraction import Affine1D
from semifix.errors import ConfigurationError
from semifix.solver import ExactFinite
from semifix.spaces import fan_index, make_builtin_space
from semifix.stability import (
    ProbeSequence,
    affine_family,
    cauchy_on_tail,
    constant_family,
    eventually_constant_family,
    iterate_bound_violations,
    iterate_convergence_check,
    make_family,
    rational_family,
    self_continuity_check,
    stability_run,
    transfer_check,
    trends_to_zero,
)
from semifix.triangle import Sum, basic_triangle_table

LINE = make_builtin_space("real_line_abs")
SQUARE = make_builtin_space("real_line_power_p", {"p": 2})
HALF = make_builtin_space("half_line_abs")
DISC = make_builtin_space("discrete_ultrametric", {"n": 4})


def _bisect(f, lo, hi, steps=200):
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_affine_family_closed_form(rng):
    n_list = [1, 2, 5, 10, 100, 1000, 10_000]
    report = stability_run(LINE, affine_family(), n_list, rng=rng)
    assert report.limit_certificate.verdict == "not-falsified"
    assert not report.inconclusive
    for n, d in zip(n_list, report.distances):
        assert abs(d - 2 / n) < 1e-9
    assert report.trend_ok


def test_rational_family_decreasing(rng):
    report = stability_run(HALF, rational_family(), [10, 100], rng=rng)
    assert not report.inconclusive
    d10, d100 = report.distances
    assert d100 < d10
    for n, row in zip((10, 100), report.rows):
        c = 1 / n**2
        # x = x/(1+x) + c, solved independently
        oracle = _bisect(lambda x: x / (1 + x) + c - x, 1e-12, 10.0)
        assert oracle == pytest.approx((c + math.sqrt(c * c + 4 * c)) / 2, rel=1e-12)
        assert row.fixed_point == pytest.approx(oracle, rel=1e-3)


def test_constant_sequence_zero_distances():
    seq = constant_family(Affine1D(0.5, 1), Linear(0.5))
    report = stability_run(LINE, seq, [1, 10, 100], verify_limit=False)
    assert report.distances == [0.0, 0.0, 0.0]
    assert report.summary()["limit_contraction"] == "declared"


def test_eventually_constant_family_on_discrete():
    seq = eventually_constant_family(4, target=2, early=0, switch=5)
    report = stability_run(DISC, seq, [1, 2, 5, 10], policy=ExactFinite(), start=0)
    assert report.limit_certificate.verdict == "verified"
    assert report.distances == [1.0, 1.0, 0.0, 0.0]


def test_iterate_convergence_affine_k2():
    rows = iterate_convergence_check(LINE, affine_family(), 2, [0.0], [1, 10, 100])
    for n, value in rows:
        assert value == pytest.approx(3 / (2 * n), rel=1e-12)


def test_iterate_convergence_k1_is_pointwise():
    seq = affine_family()
    probes = [-3.0, 0.0, 7.0]
    rows = iterate_convergence_check(LINE, seq, 1, probes, [4, 8])
    for n, value in rows:
        assert value == max(abs(seq(n)(x) - seq.limit(x)) for x in probes)


def test_iterate_convergence_constant_zero():
    seq = constant_family(Affine1D(0.5, 1), Linear(0.5))
    assert all(v == 0 for _, v in iterate_convergence_check(LINE, seq, 3, [0.0, 5.0], [1, 2]))


def test_iterate_convergence_rejects_k0():
    with pytest.raises(ValueError):
        iterate_convergence_check(LINE, affine_family(), 0, [0.0], [1])


@pytest.mark.parametrize("k", [1, 2, 5])
def test_iterate_bound_affine(k, rng):
    probes = LINE.sample_points(rng, 200)
    assert iterate_bound_violations(LINE, affine_family(), Sum(), k, probes, [1, 3, 10, 100], tol=1e-12) == []


def test_iterate_bound_finite_exact():
    seq = eventually_constant_family(4, target=2, early=0, switch=3)
    form = basic_triangle_table(DISC).as_form()
    for k in (1, 2, 3):
        assert iterate_bound_violations(DISC, seq, form, k, [0, 1, 2, 3], [1, 2, 3, 4]) == []


def test_trends_to_zero():
    assert trends_to_zero([1.0, 0.5, 1e-4])
    assert not trends_to_zero([1.0, 0.02])  # ratio holds, absolute bound does not
    assert not trends_to_zero([])


def test_self_continuity_line():
    ms = range(2, 4001)
    report = self_continuity_check(LINE, [1 / m for m in ms], [1 - 1 / m for m in ms], 0.0, 1.0)
    for m, dev in zip(ms, report.deviations):
        assert dev == pytest.approx(2 / m, abs=1e-15)
    assert report.supports_self_continuity()


def test_self_continuity_discrete_eventually_zero():
    xs = [0, 1, 3, 2, 2, 2, 2, 2, 2, 2, 2, 2]
    ys = [1] * len(xs)
    report = self_continuity_check(DISC, xs, ys, 2, 1, tail=5)
    assert report.deviations[-5:] == [0.0] * 5
    assert report.supports_self_continuity()


def test_self_continuity_fails_on_fan():
    N = 30
    fan = make_builtin_space("nonregular_family_N", {"N": N})
    xs = [fan_index(N, "a", i) for i in range(1, N + 1)]
    ys = [fan_index(N, "b", i) for i in range(1, N + 1)]
    # a_i -> p and b_i -> p
    assert fan.dist(xs[-1], 0) == pytest.approx(1 / N)
    report = self_continuity_check(fan, xs, ys, 0, 0)
    assert report.deviations == [1.0] * N
    assert not report.supports_self_continuity()


def test_self_continuity_length_mismatch():
    with pytest.raises(ValueError):
        self_continuity_check(LINE, [0.0], [0.0, 1.0], 0.0, 0.0)


def test_transfer_harmonic_inverse():
    seq = ProbeSequence([1 / m for m in range(1, 201)], 0.0, "inverse")
    (row,) = transfer_check(LINE, SQUARE, [seq])
    assert row.converges == (True, True) and row.cauchy == (True, True) and row.agrees


def test_transfer_alternating():
    seq = ProbeSequence([float(m % 2) for m in range(200)], None, "alternating")
    (row,) = transfer_check(LINE, SQUARE, [seq])
    assert row.converges == (False, False) and row.cauchy == (False, False)


def test_transfer_harmonic_sums_window_limitation():
    sums = np.cumsum([1 / j for j in range(1, 201)]).tolist()
    seq = ProbeSequence(sums, None, "harmonic")
    # single-step gaps look Cauchy although the sums diverge
    (row,) = transfer_check(LINE, SQUARE, [seq], tol=1e-2, tail=20, window=1)
    assert row.cauchy == (True, True)
    (row,) = transfer_check(LINE, SQUARE, [seq], tol=1e-2, tail=40, window=39)
    assert row.cauchy == (False, False)
    assert not cauchy_on_tail(LINE, sums, 1e-2, 40, 39)


def test_make_family():
    assert make_family({"name": "affine_shift"}).name == "affine_shift"
    assert make_family({"name": "rational_shift", "a": 2}).limit(1.0) == 0.5
    with pytest.raises(ConfigurationError):
        make_family({"name": "eventually_constant", "n": 3})
    with pytest.raises(ConfigurationError):
        make_family({"name": "spiral"})
