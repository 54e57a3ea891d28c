"""Fixed points of pointwise-convergent sequences of contractions.

Also holds the sequence-level diagnostics: pointwise convergence of iterates,
self-continuity of the semimetric, and transfer of convergence and Cauchy
tails between two semimetrics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .comparison import ComparisonFunction, Linear, RationalDecay
from .contraction import Affine1D, FiniteMap, Rational1D, SelfMap, verify_phi_contraction
from .errors import ConfigurationError
from .solver import SolveTrace, WindowCauchy, picard_solve
from .spaces import SemimetricSpace
from .triangle import TriangleForm, exceeds


@dataclass(frozen=True)
class MapSequence:
    """``n -> T_n`` together with the pointwise limit ``T_0`` and a shared ``phi``."""

    member: Callable[[int], SelfMap]
    limit: SelfMap
    phi: ComparisonFunction
    name: str = "family"

    def __call__(self, n: int) -> SelfMap:
        return self.member(n)


def affine_family(alpha: float = 0.5, beta: float = 1.0) -> MapSequence:
    """``T_n x = alpha x + beta / n`` converging to ``T_0 x = alpha x``."""
    return MapSequence(
        lambda n: Affine1D(alpha, beta / n), Affine1D(alpha, 0.0), Linear(abs(alpha)), "affine_shift"
    )


def rational_family(a: float = 1.0) -> MapSequence:
    """``T_n x = x / (1 + x) + a / n^2`` on the half-line, converging to ``x / (1 + x)``."""
    return MapSequence(lambda n: Rational1D(a / n**2), Rational1D(0.0), RationalDecay(1.0), "rational_shift")


def constant_family(T: SelfMap, phi: ComparisonFunction) -> MapSequence:
    return MapSequence(lambda n: T, T, phi, "constant")


def eventually_constant_family(n: int, target: int, early: int, switch: int) -> MapSequence:
    """Constant maps on an ``n``-point space: to ``early`` for indices below ``switch``, then to ``target``."""
    to = lambda k: FiniteMap(tuple([k] * n))
    return MapSequence(
        lambda m: to(early) if m < switch else to(target), to(target), Linear(0.0), "eventually_constant"
    )


def make_family(spec: dict) -> MapSequence:
    kind = spec.get("name")
    try:
        if kind == "affine_shift":
            return affine_family(float(spec.get("alpha", 0.5)), float(spec.get("beta", 1.0)))
        if kind == "rational_shift":
            return rational_family(float(spec.get("a", 1.0)))
        if kind == "eventually_constant":
            return eventually_constant_family(
                int(spec["n"]), int(spec["target"]), int(spec["early"]), int(spec["switch"])
            )
    except KeyError as exc:
        raise ConfigurationError(f"missing parameter {exc.args[0]!r}", exc.args[0]) from None
    raise ConfigurationError(
        f"unknown family {kind!r}; known: affine_shift, rational_shift, eventually_constant", "name"
    )


def trends_to_zero(values: Sequence[float], ratio: float = 0.1, atol: float = 1e-3) -> bool:
    """Finite evidence of a null sequence: last < ratio * first and last < atol."""
    if not values:
        return False
    first, last = values[0], values[-1]
    return last < first * ratio and last < atol


@dataclass
class StabilityRow:
    n: int
    fixed_point: object
    distance: float
    converged: bool


@dataclass
class StabilityReport:
    limit_point: object
    limit_trace: SolveTrace
    rows: list[StabilityRow] = field(default_factory=list)
    limit_certificate: object = None
    ratio: float = 0.1
    atol: float = 1e-3

    @property
    def distances(self) -> list[float]:
        return [r.distance for r in self.rows]

    @property
    def inconclusive(self) -> bool:
        return not self.limit_trace.converged or any(not r.converged for r in self.rows)

    @property
    def trend_ok(self) -> bool:
        return trends_to_zero(self.distances, self.ratio, self.atol)

    def summary(self) -> dict:
        cert = self.limit_certificate
        return {
            "limit_point": _num(self.limit_point),
            "rows": len(self.rows),
            "first_distance": self.distances[0] if self.rows else None,
            "last_distance": self.distances[-1] if self.rows else None,
            "trend_ok": self.trend_ok,
            "trend_ratio": self.ratio,
            "trend_atol": self.atol,
            "inconclusive": self.inconclusive,
            "limit_contraction": cert.verdict if cert is not None else "declared",
        }


def _num(x):
    return x if isinstance(x, (int, np.integer)) and not isinstance(x, bool) else float(x)


def stability_run(
    space: SemimetricSpace,
    seq: MapSequence,
    n_list: Sequence[int],
    policy=None,
    start=0.0,
    verify_limit: bool = True,
    rng: np.random.Generator | None = None,
    samples: int = 10_000,
    ratio: float = 0.1,
    atol: float = 1e-3,
) -> StabilityReport:
    """Fixed point ``x_n`` of each ``T_n`` and its distance to the fixed point of ``T_0``.

    With ``verify_limit`` the limit map is checked against ``seq.phi``
    (exhaustively on finite spaces, by sampling otherwise) instead of trusted.
    """
    policy = policy if policy is not None else WindowCauchy()
    cert = None
    if verify_limit:
        mode = "exhaustive" if space.is_finite else "sample"
        cert = verify_phi_contraction(space, seq.limit, seq.phi, mode, k=samples, rng=rng)
    limit_trace = picard_solve(space, seq.limit, start, policy)
    x0 = limit_trace.final_point
    report = StabilityReport(x0, limit_trace, limit_certificate=cert, ratio=ratio, atol=atol)
    for n in n_list:
        tr = picard_solve(space, seq(n), start, policy)
        report.rows.append(StabilityRow(int(n), tr.final_point, float(space.dist(x0, tr.final_point)), tr.converged))
    return report


def _power(T: SelfMap, k: int, x):
    for _ in range(k):
        x = T(x)
    return x


def iterate_convergence_check(
    space: SemimetricSpace, seq: MapSequence, k: int, probes: Sequence, n_list: Sequence[int]
) -> list[tuple[int, float]]:
    """Rows ``(n, max over probes of d(T_n^k x, T_0^k x))``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    xs = np.asarray(probes)
    limit = _power(seq.limit, k, xs)
    return [(int(n), float(np.max(space.dist(_power(seq(n), k, xs), limit)))) for n in n_list]


def iterate_bound_violations(
    space: SemimetricSpace,
    seq: MapSequence,
    form: TriangleForm,
    k: int,
    probes: Sequence,
    n_list: Sequence[int],
    tol: float = 0.0,
) -> list[tuple[int, object, float, float]]:
    """Where ``d(T_n^{k+1} x, T_0^{k+1} x) > form(d(T_n x, T_0 x), d(T_n^k T_0 x, T_0^k T_0 x))``.

    ``form`` should be a triangle function of the space (its basic triangle
    table on finite spaces).
    """
    xs = np.asarray(probes)
    T0 = seq.limit
    T0x = T0(xs)
    lhs_limit = _power(T0, k + 1, xs)
    rhs_limit = _power(T0, k, T0x)
    out = []
    for n in n_list:
        Tn = seq(n)
        lhs = np.asarray(space.dist(_power(Tn, k + 1, xs), lhs_limit), dtype=float)
        rhs = np.asarray(form(space.dist(Tn(xs), T0x), space.dist(_power(Tn, k, T0x), rhs_limit)), dtype=float)
        lhs, rhs = np.broadcast_arrays(lhs, rhs)
        for i in np.nonzero(exceeds(lhs, rhs, tol))[0]:
            out.append((int(n), xs[i].item(), float(lhs[i]), float(rhs[i])))
    return out


# --------------------------------------------------------------------------
# sequence diagnostics


@dataclass
class SelfContinuityReport:
    deviations: list[float]
    tail: int

    @property
    def tail_max(self) -> float:
        return max(self.deviations[-self.tail:]) if self.deviations else 0.0

    def supports_self_continuity(self, ratio: float = 0.1, atol: float = 1e-3) -> bool:
        if self.tail_max == 0.0:
            return True
        return trends_to_zero(self.deviations, ratio, atol)


def self_continuity_check(
    space: SemimetricSpace, xs: Sequence, ys: Sequence, x_limit, y_limit, tail: int = 10
) -> SelfContinuityReport:
    """``|d(x_m, y_m) - d(x, y)|`` along declared convergent sequences ``x_m -> x``, ``y_m -> y``."""
    if len(xs) != len(ys):
        raise ValueError("probe sequences must have equal length")
    target = float(space.dist(x_limit, y_limit))
    devs = [abs(float(space.dist(a, b)) - target) for a, b in zip(xs, ys)]
    return SelfContinuityReport(devs, max(1, min(tail, len(devs))))


@dataclass
class ProbeSequence:
    """Finite prefix of a sequence, with its declared limit (``None`` if it has none)."""

    points: Sequence
    limit: object = None
    label: str = ""


@dataclass
class TransferRow:
    label: str
    converges: tuple[bool, bool]
    cauchy: tuple[bool, bool]

    @property
    def agrees(self) -> bool:
        return self.converges[0] == self.converges[1] and self.cauchy[0] == self.cauchy[1]


def converges_on_tail(space: SemimetricSpace, seq: ProbeSequence, tol: float, tail: int) -> bool:
    if seq.limit is None:
        return False
    pts = list(seq.points)[-tail:]
    return all(float(space.dist(p, seq.limit)) < tol for p in pts)


def cauchy_on_tail(space: SemimetricSpace, points: Sequence, tol: float, tail: int, window: int) -> bool:
    """All gaps ``d(x_m, x_{m+k})``, ``k <= window``, within the tail stay below ``tol``."""
    pts = list(points)[-tail:]
    for i, a in enumerate(pts):
        for b in itertools.islice(pts, i + 1, i + 1 + window):
            if not float(space.dist(a, b)) < tol:
                return False
    return True


def transfer_check(
    space1: SemimetricSpace,
    space2: SemimetricSpace,
    probes: Sequence[ProbeSequence],
    tol: float = 1e-2,
    tail: int = 20,
    window: int = 1,
) -> list[TransferRow]:
    """Compare convergence and Cauchy verdicts of probe sequences under two semimetrics."""
    rows = []
    for k, seq in enumerate(probes):
        rows.append(
            TransferRow(
                seq.label or f"probe{k}",
                (converges_on_tail(space1, seq, tol, tail), converges_on_tail(space2, seq, tol, tail)),
                (
                    cauchy_on_tail(space1, seq.points, tol, tail, window),
                    cauchy_on_tail(space2, seq.points, tol, tail, window),
                ),
            )
        )
    return rows
