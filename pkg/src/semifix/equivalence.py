"""Lipschitz moduli between two semimetrics on one finite carrier.

``L_{d1,d2}(t) = max{ d1(x, y) : d2(x, y) <= t }`` is the least increasing
function with ``d1 <= L(d2)``. Two semimetrics are equivalent when both moduli
vanish at ``0+``; finite data can falsify that but never prove it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .extreal import ext_real
from .spaces import FiniteSpace
from .triangle import DiagnosticCurve, EXACT, basic_triangle_exact, basic_triangle_table


def _matrix(d) -> np.ndarray:
    return d.matrix if isinstance(d, FiniteSpace) else np.asarray(d, dtype=float)


def _pair(d1, d2) -> tuple[np.ndarray, np.ndarray]:
    m1, m2 = _matrix(d1), _matrix(d2)
    if m1.shape != m2.shape or m1.ndim != 2 or m1.shape[0] != m1.shape[1]:
        raise ShapeError(f"semimetrics live on different carriers: {m1.shape} vs {m2.shape}")
    return m1, m2


def lipschitz_modulus_exact(d1, d2, t: float) -> float:
    """Exact ``L_{d1,d2}(t)``; diagonal pairs always qualify, so the value is >= 0."""
    m1, m2 = _pair(d1, d2)
    t = ext_real(t)
    return float(np.where(m2 <= t, m1, 0.0).max())


@dataclass(frozen=True, eq=False)
class LipschitzModulusTable:
    """``L_{d1,d2}`` on the attained ``d2`` values (0 included).

    Off-grid arguments read the value at the smallest attained argument
    ``>= t``, which can only over-estimate; beyond the largest attained value
    the modulus is constant and exact.
    """

    levels: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        idx = np.minimum(np.searchsorted(self.levels, t, side="left"), len(self.levels) - 1)
        out = self.values[idx]
        return out if np.ndim(out) else float(out)

    def rows(self):
        return zip(self.levels.tolist(), self.values.tolist())


def lipschitz_modulus_table(d1, d2) -> LipschitzModulusTable:
    m1, m2 = _pair(d1, d2)
    levels = np.unique(m2)
    best = np.zeros(len(levels))
    np.maximum.at(best, np.searchsorted(levels, m2).ravel(), m1.ravel())
    return LipschitzModulusTable(levels, np.maximum.accumulate(best))


@dataclass
class EquivalenceReport:
    forward: DiagnosticCurve  # L_{d1,d2}
    backward: DiagnosticCurve  # L_{d2,d1}
    verdict: str
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "notes": self.notes,
            "L_d1_d2": {"t": self.forward.params, "L": self.forward.values},
            "L_d2_d1": {"t": self.backward.params, "L": self.backward.values},
        }


CONSISTENT = "consistent-with-equivalent"
FALSIFIED = "falsified"


def _plateau(values: list[float], width: int) -> bool:
    tail = values[:width]
    return len(tail) >= 2 and min(tail) > 0 and max(tail) == min(tail)


def equivalence_diagnostic(
    d1, d2, t_grid: Sequence[float], plateau_points: int = 3
) -> EquivalenceReport:
    """Both modulus curves on ``t_grid`` and a verdict.

    A curve shows a positive lower plateau when its values at the
    ``plateau_points`` smallest grid points are equal and positive; either
    curve doing so falsifies equivalence at the scales the grid reaches.
    Otherwise the data is only consistent with equivalence.
    """
    m1, m2 = _pair(d1, d2)
    grid = sorted({float(t) for t in t_grid})
    if not grid:
        raise ValueError("t_grid is empty")
    fwd = DiagnosticCurve(grid, [lipschitz_modulus_exact(m1, m2, t) for t in grid], "lipschitz-modulus", EXACT)
    bwd = DiagnosticCurve(grid, [lipschitz_modulus_exact(m2, m1, t) for t in grid], "lipschitz-modulus", EXACT)
    notes = []
    falsified = False
    for label, curve in (("L_d1_d2", fwd), ("L_d2_d1", bwd)):
        if _plateau(curve.values, plateau_points):
            falsified = True
            notes.append(f"{label} is constant at {curve.values[0]} on the smallest grid scales")
    for label, m in (("d2", m2), ("d1", m1)):
        positive = m[m > 0]
        if positive.size and grid[0] < positive.min():
            notes.append(
                f"grid reaches below the smallest {label} distance; "
                "the modulus vanishes there on any finite carrier"
            )
    return EquivalenceReport(fwd, bwd, FALSIFIED if falsified else CONSISTENT, notes)


@dataclass(frozen=True)
class ComposedBoundViolation:
    u: float
    v: float
    lhs: float
    rhs: float


def composed_triangle_bound_check(d1, d2, brute_force: bool = False) -> list[ComposedBoundViolation]:
    """Check ``Phi_{d1}(u, v) <= L12(Phi_{d2}(L21(u), L21(v)))`` at attained ``d1`` pairs.

    ``brute_force`` evaluates every piece by direct enumeration instead of
    through precomputed tables.
    """
    m1, m2 = _pair(d1, d2)
    s1 = FiniteSpace(m1, validate=False)
    s2 = FiniteSpace(m2, validate=False)
    levels = s1.levels()
    out = []
    if brute_force:
        for u in levels:
            for v in levels:
                lhs = basic_triangle_exact(s1, u, v)
                inner = basic_triangle_exact(
                    s2, lipschitz_modulus_exact(m2, m1, u), lipschitz_modulus_exact(m2, m1, v)
                )
                rhs = lipschitz_modulus_exact(m1, m2, inner)
                if lhs > rhs:
                    out.append(ComposedBoundViolation(float(u), float(v), lhs, rhs))
        return out
    phi1 = basic_triangle_table(s1)
    phi2 = basic_triangle_table(s2).as_form()
    L12 = lipschitz_modulus_table(m1, m2)
    L21 = lipschitz_modulus_table(m2, m1)
    back = L21(levels)
    inner = phi2(back[:, None], back[None, :])
    rhs = L12(inner)
    for i, j in zip(*np.nonzero(phi1.values > rhs)):
        out.append(ComposedBoundViolation(float(levels[i]), float(levels[j]), float(phi1.values[i, j]), float(rhs[i, j])))
    return out
