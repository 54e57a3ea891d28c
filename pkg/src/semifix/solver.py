"""Picard iteration ``x_{n+1} = T x_n`` with pluggable stopping policies.

Hitting the iteration cap is a normal outcome (``stop_reason == "cap"``),
never an exception: completeness, regularity and contractivity are declared by
the caller and may simply not hold.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .comparison import DEFAULT_N_CAP, ComparisonFunction, n_epsilon
from .contraction import SelfMap
from .errors import ConfigurationError, IterationCapError, PreconditionError
from .extreal import format_number
from .spaces import SemimetricSpace
from .triangle import TriangleForm

DEFAULT_CAP = 10**6
FULL_TRACE = 10**4

CONVERGED = "converged"
CAP = "cap"


@dataclass(frozen=True)
class ExactFinite:
    """Stop once ``T x == x``."""

    cap: int = DEFAULT_CAP
    name = "exact_finite"


@dataclass(frozen=True)
class WindowCauchy:
    """Stop once ``d(x_n, x_{n+k}) < tol`` for ``k = 1..window``."""

    tol: float = 1e-9
    window: int = 3
    cap: int = DEFAULT_CAP
    name = "window_cauchy"

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive", "policy.tol")
        if self.window < 1:
            raise ConfigurationError("window must be >= 1", "policy.window")


@dataclass(frozen=True)
class TheoryGuided:
    """Stopping rule modelled on the ball-invariance argument for phi-contractions.

    With ``delta`` the largest radius such that ``form(delta, delta) < eps``
    and ``m = n_epsilon(phi, eps, delta)``, iteration stops at the first ``n``
    where the next ``2m`` iterates all stay within ``min(delta, eps)`` of
    ``x_n``. If ``form`` is a triangle function for the space, any two iterates
    in that window are then closer than ``eps``. This is a heuristic target,
    not a certified error bound.
    """

    eps: float
    form: TriangleForm
    phi: ComparisonFunction
    cap: int = DEFAULT_CAP
    n_cap: int = DEFAULT_N_CAP
    name = "theory_guided"

    def __post_init__(self):
        if not self.eps > 0:
            raise ConfigurationError("eps must be positive", "policy.eps")


def delta_for(form: TriangleForm, eps: float, steps: int = 200) -> float:
    """Largest ``delta`` (to bisection accuracy) with ``form(delta, delta) < eps``."""
    lo, hi = 0.0, float(eps)
    while float(form(hi, hi)) < eps:
        lo, hi = hi, hi * 2
        if math.isinf(hi):
            return lo
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if float(form(mid, mid)) < eps:
            lo = mid
        else:
            hi = mid
    return lo


def _retained(n: int) -> bool:
    """Full trace below FULL_TRACE, then every 2^(j+1)-th index in block j."""
    if n < FULL_TRACE:
        return True
    block = (n // FULL_TRACE).bit_length() - 1
    return n % (2 ** (block + 1)) == 0


@dataclass
class SolveTrace:
    indices: list[int] = field(default_factory=list)
    points: list = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    stop_reason: str = CAP
    iterations: int = 0
    final_point: object = None
    policy: str = ""
    info: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.stop_reason == CONVERGED

    def _record(self, n: int, x, residual: float, force: bool = False) -> None:
        if force or _retained(n):
            if self.indices and self.indices[-1] == n:
                return
            self.indices.append(n)
            self.points.append(x)
            self.residuals.append(float(residual))

    def rows(self):
        return zip(self.indices, self.residuals)

    def summary(self) -> dict:
        final = self.final_point
        return {
            "final_point": final if isinstance(final, int) else float(final),
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "policy": self.policy,
            "last_residual": self.residuals[-1] if self.residuals else None,
            **self.info,
        }


def picard_solve(
    space: SemimetricSpace,
    T: SelfMap,
    start,
    policy: ExactFinite | WindowCauchy | TheoryGuided | None = None,
) -> SolveTrace:
    """Iterate ``T`` from ``start`` until ``policy`` fires or its cap is reached.

    ``iterations`` is the index ``n`` of the returned point ``x_n``; the trace
    keeps ``d(x_n, x_{n+1})`` for every retained ``n``.
    """
    policy = policy if policy is not None else WindowCauchy()
    if not space.contains(start):
        raise PreconditionError(f"start point {start!r} is not in {space.name}")
    T.check_carrier(space)
    if policy.cap < 1:
        raise ConfigurationError("cap must be >= 1", "policy.cap")
    trace = SolveTrace(policy=policy.name)
    dist = space.dist
    x = start

    if isinstance(policy, ExactFinite):
        for n in range(policy.cap + 1):
            nx = T(x)
            res = dist(x, nx)
            trace._record(n, x, res)
            if nx == x:
                trace._record(n, x, res, force=True)
                trace.stop_reason, trace.iterations, trace.final_point = CONVERGED, n, x
                return trace
            if n == policy.cap:
                break
            x = nx
        trace.iterations, trace.final_point = policy.cap, x
        return trace

    if isinstance(policy, WindowCauchy):
        width, threshold = policy.window, policy.tol
    elif isinstance(policy, TheoryGuided):
        delta = delta_for(policy.form, policy.eps)
        if delta <= 0:
            raise PreconditionError(f"no delta > 0 with form(delta, delta) < {policy.eps}")
        trace.info.update(delta=delta, eps=policy.eps)
        try:
            m = n_epsilon(policy.phi, policy.eps, delta, policy.n_cap)
        except IterationCapError as exc:
            trace.info["note"] = f"n(eps) not found: {exc}"
            trace.final_point = start
            trace._record(0, start, dist(start, T(start)), force=True)
            return trace
        trace.info["n_eps"] = m
        width, threshold = 2 * m, min(delta, policy.eps)
    else:
        raise ConfigurationError(f"unknown policy {policy!r}", "policy")

    window = deque([x], maxlen=width + 1)
    for n in range(policy.cap):
        nx = T(x)
        res = dist(x, nx)
        trace._record(n, x, res)
        window.append(nx)
        x = nx
        if len(window) == width + 1:
            anchor = window[0]
            if all(dist(anchor, y) < threshold for y in itertools.islice(window, 1, None)):
                trace._record(n, window[-2], res, force=True)
                trace.stop_reason, trace.iterations, trace.final_point = CONVERGED, n + 1, x
                return trace
    trace.iterations, trace.final_point = policy.cap, x
    return trace


def fixed_point_residual(space: SemimetricSpace, T: SelfMap, x) -> float:
    """``d(x, Tx)``."""
    if not space.contains(x):
        raise PreconditionError(f"{x!r} is not in {space.name}")
    return float(space.dist(x, T(x)))


def check_residual_majorization(
    trace: SolveTrace, phi: ComparisonFunction, atol: float = 1e-12
) -> list[tuple[int, float, float]]:
    """Retained ``n`` where ``d(x_n, x_{n+1}) > phi^n(d(x_0, x_1)) + atol``."""
    if not trace.indices or trace.indices[0] != 0:
        raise ValueError("trace does not start at index 0")
    bound, at = trace.residuals[0], 0
    bad = []
    for n, res in zip(trace.indices, trace.residuals):
        while at < n:
            bound = float(phi(bound))
            at += 1
        if res > bound + atol:
            bad.append((n, res, bound))
    return bad


@dataclass
class UniquenessReport:
    starts: list
    traces: list[SolveTrace]
    max_distance: float

    @property
    def inconclusive(self) -> bool:
        return any(not t.converged for t in self.traces)

    def distinct_fixed_points(self, tol: float = 1e-9) -> bool:
        """Converged runs ending apart: symptom of a map that is no phi-contraction."""
        return not self.inconclusive and self.max_distance > tol

    def summary(self) -> dict:
        return {
            "starts": [s if isinstance(s, int) else float(s) for s in self.starts],
            "finals": [t.summary()["final_point"] for t in self.traces],
            "max_distance": self.max_distance,
            "inconclusive": self.inconclusive,
            "distinct_fixed_points": self.distinct_fixed_points(),
        }


def uniqueness_probe(
    space: SemimetricSpace,
    T: SelfMap,
    starts: Sequence,
    policy: ExactFinite | WindowCauchy | TheoryGuided | None = None,
) -> UniquenessReport:
    """Solve from every start; report the largest distance between end points."""
    if len(starts) < 2:
        raise PreconditionError("uniqueness probe needs at least two starts")
    traces = [picard_solve(space, T, s, policy) for s in starts]
    finals = [t.final_point for t in traces]
    worst = max(
        (float(space.dist(a, b)) for a, b in itertools.combinations(finals, 2)), default=0.0
    )
    return UniquenessReport(list(starts), traces, worst)


def trace_csv_rows(trace: SolveTrace):
    yield ("n", "residual")
    for n, res in trace.rows():
        yield (str(n), format_number(res))
