"""Comparison functions: monotone self-maps of [0, inf) whose iterates die out.

Every comparison function lies strictly below the identity on positive
arguments; the checks here can falsify that and the decay property on finite
grids, but can never prove the decay property, which is asymptotic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, IterationCapError

DEFAULT_N_CAP = 10**6


class ComparisonFunction:
    """Callable on floats or numpy arrays."""

    name = "phi"

    def __call__(self, t):
        raise NotImplementedError

    def knots(self) -> np.ndarray:
        """Breakpoints that a grid check should include (none for closed forms)."""
        return np.empty(0)

    def describe(self) -> dict:
        return {"variant": self.name}


@dataclass(frozen=True)
class Linear(ComparisonFunction):
    """``t -> q t`` with ``0 <= q < 1`` (the Banach case)."""

    q: float
    name = "linear"

    def __post_init__(self):
        if not (0 <= self.q < 1):
            raise ConfigurationError(f"linear comparison needs 0 <= q < 1, got {self.q}", "q")

    def __call__(self, t):
        return self.q * t

    def describe(self) -> dict:
        return {"variant": self.name, "q": self.q}


@dataclass(frozen=True)
class RationalDecay(ComparisonFunction):
    """``t -> t / (1 + a t)``; n-th iterate is ``t / (1 + n a t)``."""

    a: float
    name = "rational_decay"

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ConfigurationError(f"rational decay needs a > 0, got {self.a}", "a")

    def __call__(self, t):
        return t / (1 + self.a * t)

    def describe(self) -> dict:
        return {"variant": self.name, "a": self.a}


@dataclass(frozen=True, eq=False)
class TabulatedMonotone(ComparisonFunction):
    """Step function read off at the nearest knot from above.

    Arguments beyond the last knot take the last value.
    """

    ts: np.ndarray
    values: np.ndarray
    name = "tabulated"

    def __post_init__(self):
        ts = np.asarray(self.ts, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if ts.ndim != 1 or ts.shape != values.shape or len(ts) == 0:
            raise ConfigurationError("tabulated comparison needs matching nonempty knot and value lists")
        if np.any(np.diff(ts) <= 0):
            raise ConfigurationError("knots must be strictly increasing", "ts")
        if np.any(ts < 0) or np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ConfigurationError("knots and values must be finite and nonnegative")
        ts.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "values", values)

    def __call__(self, t):
        idx = np.minimum(np.searchsorted(self.ts, t, side="left"), len(self.ts) - 1)
        out = self.values[idx]
        return out if np.ndim(out) else float(out)

    def knots(self) -> np.ndarray:
        return self.ts

    def describe(self) -> dict:
        return {"variant": self.name, "ts": self.ts.tolist(), "values": self.values.tolist()}


@dataclass(frozen=True)
class Power(ComparisonFunction):
    """``m``-fold composition of another comparison function."""

    base: ComparisonFunction
    m: int
    name = "power"

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError(f"power needs m >= 1, got {self.m}", "m")

    def __call__(self, t):
        return iterate(self.base, self.m, t)

    def knots(self) -> np.ndarray:
        return self.base.knots()

    def describe(self) -> dict:
        return {"variant": self.name, "m": self.m, "base": self.base.describe()}


def make_comparison(spec: dict) -> ComparisonFunction:
    """Build from a config entry such as ``{"variant": "linear", "q": 0.5}``."""
    variant = spec.get("variant")
    try:
        if variant == "linear":
            return Linear(float(spec["q"]))
        if variant == "rational_decay":
            return RationalDecay(float(spec["a"]))
        if variant == "tabulated":
            return TabulatedMonotone(spec["ts"], spec["values"])
        if variant == "power":
            return Power(make_comparison(spec["base"]), int(spec["m"]))
    except KeyError as exc:
        raise ConfigurationError(f"missing parameter {exc.args[0]!r}", exc.args[0]) from None
    raise ConfigurationError(
        f"unknown comparison function {variant!r}; known: linear, rational_decay, tabulated, power",
        "variant",
    )


def iterate(phi: ComparisonFunction, n: int, t):
    """``phi`` composed with itself ``n`` times, applied to ``t``."""
    if n < 1:
        raise ValueError(f"iterate needs n >= 1, got {n}")
    for _ in range(n):
        t = phi(t)
    return t


@dataclass
class ComparisonReport:
    monotonicity_failures: list[tuple[float, float]] = field(default_factory=list)
    undecided: list[float] = field(default_factory=list)
    zero_value: float = 0.0
    n_max: int = 0

    @property
    def verdict(self) -> str:
        """``fail`` on a monotonicity break, ``undecided`` when decay was not seen, else ``pass``."""
        if self.monotonicity_failures:
            return "fail"
        if self.undecided or self.zero_value > 0:
            return "undecided"
        return "pass"

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"


def verify_comparison(
    phi: ComparisonFunction,
    t_grid: Sequence[float],
    n_max: int = 1000,
    decay_tol: float = 1e-6,
) -> ComparisonReport:
    """Grid evidence that ``phi`` is a comparison function.

    Monotonicity is checked on the grid merged with ``phi``'s own knots. For
    each grid point the iterates are followed until they drop below
    ``decay_tol``; points that never do within ``n_max`` steps are undecided.
    A positive ``phi(0)`` is recorded and also leaves the verdict undecided.
    """
    grid = np.asarray(list(t_grid), dtype=float)
    if grid.size == 0:
        raise ConfigurationError("t_grid is empty", "t_grid")
    if n_max < 1:
        raise ConfigurationError("n_max must be >= 1", "n_max")
    report = ComparisonReport(n_max=n_max)
    merged = np.unique(np.concatenate([[0.0], grid, phi.knots()]))
    vals = np.asarray(phi(merged), dtype=float)
    for k in np.nonzero(np.diff(vals) < 0)[0]:
        report.monotonicity_failures.append((float(merged[k]), float(merged[k + 1])))
    report.zero_value = float(phi(0.0))
    for t in grid:
        x = float(t)
        for _ in range(n_max):
            x = float(phi(x))
            if x < decay_tol:
                break
        else:
            report.undecided.append(float(t))
    return report


def check_below_identity(phi: ComparisonFunction, t_grid: Sequence[float]) -> list[float]:
    """Grid points ``t`` with ``phi(t) >= t``; empty for a genuine comparison function."""
    grid = np.asarray(list(t_grid), dtype=float)
    if np.any(grid <= 0):
        raise ValueError("below-identity check needs strictly positive grid points")
    vals = np.asarray(phi(grid), dtype=float)
    return [float(t) for t in grid[vals >= grid]]


def n_epsilon(
    phi: ComparisonFunction, eps: float, delta: float, n_cap: int = DEFAULT_N_CAP
) -> int:
    """Least ``n >= 1`` with ``phi^n(eps) < delta``.

    Raises ``IterationCapError`` past ``n_cap``: either ``phi`` is not a
    comparison function or it decays too slowly for the cap.
    """
    if not (eps > 0 and delta > 0):
        raise ValueError("eps and delta must be positive")
    t = float(eps)
    for n in range(1, n_cap + 1):
        t = float(phi(t))
        if t < delta:
            return n
    raise IterationCapError(
        f"phi^n({eps}) stayed >= {delta} for n <= {n_cap}", n_cap
    )


BUILTIN_COMPARISONS = {
    "linear": Linear,
    "rational_decay": RationalDecay,
}
