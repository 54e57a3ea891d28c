"""Triangle functions, the basic triangle function of a finite space, regularity.

A triangle function ``Phi`` for a semimetric ``d`` bounds ``d(x, y)`` by
``Phi(d(x, z), d(y, z))`` for every pivot ``z``. On a finite space the least
such function at attained arguments is the basic triangle function

    Phi_d(u, v) = max{ d(x, y) : some p has d(p, x) <= u and d(p, y) <= v },

always defined because ``x = y = p`` qualifies. Balls ``B(p, r)`` are open
(strict ``<``) while ``Phi_d`` uses ``<=``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, ModeError, PreconditionError
from .extreal import INF, ext_real
from .spaces import CONTINUUM_TOL, FiniteSpace, SemimetricSpace, materialize


# --------------------------------------------------------------------------
# candidate forms


class TriangleForm:
    """Symmetric, monotone map of pairs of extended reals with value 0 at (0, 0).

    Calling a form evaluates it elementwise on scalars or numpy arrays.
    """

    name = "form"

    def __call__(self, u, v):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"variant": self.name}


@dataclass(frozen=True)
class Sum(TriangleForm):
    name = "sum"

    def __call__(self, u, v):
        return np.add(u, v)


@dataclass(frozen=True)
class Max(TriangleForm):
    name = "max"

    def __call__(self, u, v):
        return np.maximum(u, v)


def _check_c(c: float) -> None:
    if not (c >= 1 and math.isfinite(c)):
        raise ConfigurationError(f"constant c must be a finite number >= 1, got {c}", "c")


@dataclass(frozen=True)
class CRelaxed(TriangleForm):
    c: float
    name = "crelaxed"

    def __post_init__(self):
        _check_c(self.c)

    def __call__(self, u, v):
        return self.c * np.add(u, v)

    def describe(self) -> dict:
        return {"variant": self.name, "c": self.c}


@dataclass(frozen=True)
class CInframetric(TriangleForm):
    c: float
    name = "cinframetric"

    def __post_init__(self):
        _check_c(self.c)

    def __call__(self, u, v):
        return self.c * np.maximum(u, v)

    def describe(self) -> dict:
        return {"variant": self.name, "c": self.c}


@dataclass(frozen=True)
class PthOrder(TriangleForm):
    p: float
    name = "pth_order"

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ConfigurationError(f"p must be a positive finite number, got {self.p}", "p")

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        with np.errstate(over="ignore"):
            out = (u**self.p + v**self.p) ** (1.0 / self.p)
        return out if out.ndim else float(out)

    def describe(self) -> dict:
        return {"variant": self.name, "p": self.p}


@dataclass(frozen=True, eq=False)
class Tabulated(TriangleForm):
    """Table on a grid ``us x vs``; off-grid queries round up to the grid.

    A query ``(u, v)`` reads the entry at the smallest grid pair dominating it
    componentwise, and is ``+inf`` when no grid pair dominates. This keeps the
    form monotone and never below the tabulated function it stands in for.
    """

    us: np.ndarray
    vs: np.ndarray
    values: np.ndarray
    name = "tabulated"

    def __post_init__(self):
        us = np.asarray(self.us, dtype=float)
        vs = np.asarray(self.vs, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(us), len(vs)):
            raise ConfigurationError(
                f"table shape {values.shape} does not match grid ({len(us)}, {len(vs)})"
            )
        if np.any(np.diff(us) <= 0) or np.any(np.diff(vs) <= 0):
            raise ConfigurationError("table grids must be strictly increasing")
        object.__setattr__(self, "us", us)
        object.__setattr__(self, "vs", vs)
        object.__setattr__(self, "values", values)

    def __call__(self, u, v):
        u_arr = np.asarray(u, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        iu = np.searchsorted(self.us, u_arr, side="left")
        iv = np.searchsorted(self.vs, v_arr, side="left")
        iu, iv = np.broadcast_arrays(iu, iv)
        outside = (iu >= len(self.us)) | (iv >= len(self.vs))
        out = np.where(
            outside,
            INF,
            self.values[np.minimum(iu, len(self.us) - 1), np.minimum(iv, len(self.vs) - 1)],
        )
        return out if out.ndim else float(out)

    def describe(self) -> dict:
        return {"variant": self.name, "grid_size": [len(self.us), len(self.vs)]}


FORMS = {
    "sum": lambda p: Sum(),
    "max": lambda p: Max(),
    "crelaxed": lambda p: CRelaxed(float(p["c"])),
    "cinframetric": lambda p: CInframetric(float(p["c"])),
    "pth_order": lambda p: PthOrder(float(p["p"])),
}


def make_form(spec: dict) -> TriangleForm:
    """Build a closed-form triangle function from ``{"variant": ..., params}``."""
    variant = spec.get("variant")
    if variant not in FORMS:
        raise ConfigurationError(
            f"unknown triangle form {variant!r}; known: {', '.join(FORMS)}", "variant"
        )
    try:
        return FORMS[variant](spec)
    except KeyError as exc:
        raise ConfigurationError(f"missing parameter {exc.args[0]!r}", exc.args[0]) from None


def eval_triangle(form: TriangleForm, u: float, v: float) -> float:
    return float(form(ext_real(u), ext_real(v)))


# --------------------------------------------------------------------------
# basic triangle function


def basic_triangle_exact(space: FiniteSpace, u: float, v: float) -> float:
    """``Phi_d(u, v)`` by direct enumeration of all witness triples ``(p, x, y)``."""
    u, v = ext_real(u), ext_real(v)
    D = space.matrix
    near_u = D <= u  # [p, x]
    near_v = D <= v  # [p, y]
    ok = near_u[:, :, None] & near_v[:, None, :]
    return float(np.where(ok, D[None, :, :], 0.0).max())


@dataclass(frozen=True, eq=False)
class BasicTriangleTable:
    """``Phi_d`` on every pair of attained distances (0 included)."""

    space: FiniteSpace
    levels: np.ndarray
    values: np.ndarray

    def entry(self, u: float, v: float) -> float:
        return float(self.as_form()(u, v))

    def as_form(self) -> Tabulated:
        return Tabulated(self.levels, self.levels, self.values)

    def rows(self) -> Iterator[tuple[float, float, float]]:
        for i, u in enumerate(self.levels):
            for j, v in enumerate(self.levels):
                yield float(u), float(v), float(self.values[i, j])


def basic_triangle_table(space: FiniteSpace) -> BasicTriangleTable:
    """Tabulate ``Phi_d`` over attained distances.

    Each witness triple ``(p, x, y)`` contributes ``d(x, y)`` to every cell
    dominating ``(d(p, x), d(p, y))``; a scatter-max followed by running maxima
    along both axes gives the table in ``O(n^3 + L^2)``.
    """
    D = space.matrix
    levels = space.levels()
    rank = np.searchsorted(levels, D)
    n = space.n
    grid = np.zeros((len(levels), len(levels)))
    ru = np.broadcast_to(rank[:, :, None], (n, n, n))
    rv = np.broadcast_to(rank[:, None, :], (n, n, n))
    vals = np.broadcast_to(D[None, :, :], (n, n, n))
    np.maximum.at(grid, (ru.ravel(), rv.ravel()), vals.ravel())
    grid = np.maximum.accumulate(grid, axis=0)
    grid = np.maximum.accumulate(grid, axis=1)
    grid.setflags(write=False)
    return BasicTriangleTable(space, levels, grid)


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class TriangleViolation:
    x: object
    y: object
    z: object
    lhs: float
    rhs: float


def exceeds(lhs, rhs, tol: float):
    """``lhs > rhs`` up to a mixed absolute/relative tolerance."""
    if tol == 0:
        return np.greater(lhs, rhs)
    with np.errstate(invalid="ignore"):
        return np.greater(lhs, rhs + tol * np.maximum(1.0, rhs))


def verify_triangle_function(
    space: SemimetricSpace,
    form: TriangleForm,
    mode: str = "exhaustive",
    k: int = 10_000,
    rng: np.random.Generator | None = None,
    tol: float | None = None,
) -> list[TriangleViolation]:
    """Triples ``(x, y, z)`` with ``d(x, y) > Phi(d(x, z), d(y, z))``.

    ``mode`` is ``"exhaustive"`` (finite spaces only) or ``"sample"`` with
    ``k`` random triples. An empty result certifies the form in exhaustive mode
    and only fails to falsify it in sample mode.
    """
    if tol is None:
        tol = 0.0 if space.is_finite else CONTINUUM_TOL
    if mode == "exhaustive":
        if not space.is_finite:
            raise ModeError(f"exhaustive verification needs a finite space, got {space.name}")
        return _verify_exhaustive(space, form, tol)
    if mode != "sample":
        raise ConfigurationError(f"unknown mode {mode!r}", "mode")
    rng = rng if rng is not None else np.random.default_rng(0)
    if space.is_finite:
        x, y, z = (rng.integers(0, space.n, size=k) for _ in range(3))
    else:
        x, y, z = space.sample_triples(rng, k)
    lhs = space.dist(x, y)
    rhs = form(space.dist(x, z), space.dist(y, z))
    bad = np.nonzero(exceeds(lhs, rhs, tol))[0]
    cast = int if space.is_finite else float
    return [
        TriangleViolation(cast(x[i]), cast(y[i]), cast(z[i]), float(lhs[i]), float(rhs[i]))
        for i in bad
    ]


def _verify_exhaustive(space: FiniteSpace, form: TriangleForm, tol: float) -> list[TriangleViolation]:
    D = space.matrix
    out: list[TriangleViolation] = []
    for x in range(space.n):
        # rows y, columns z
        rhs = form(D[x][None, :], D)
        lhs = D[x][:, None]
        for y, z in zip(*np.nonzero(exceeds(lhs, rhs, tol))):
            out.append(TriangleViolation(x, int(y), int(z), float(D[x, y]), float(rhs[y, z])))
    return out


@dataclass(frozen=True)
class OptimalityViolation:
    u: float
    v: float
    table_value: float
    form_value: float


def check_optimality(table: BasicTriangleTable, form: TriangleForm) -> list[OptimalityViolation]:
    """Attained pairs where ``Phi_d`` exceeds a verified triangle function.

    Raises ``PreconditionError`` when ``form`` is not a triangle function for
    the table's space, since the comparison is only meaningful for one.
    """
    failures = verify_triangle_function(table.space, form, "exhaustive")
    if failures:
        raise PreconditionError(
            f"form {form.describe()} is not a triangle function for this space "
            f"({len(failures)} violating triples)"
        )
    U, V = np.meshgrid(table.levels, table.levels, indexing="ij")
    reference = np.broadcast_to(form(U, V), U.shape)
    bad = np.nonzero(table.values > reference)
    return [
        OptimalityViolation(float(U[i, j]), float(V[i, j]), float(table.values[i, j]), float(reference[i, j]))
        for i, j in zip(*bad)
    ]


def smallest_valid_constant(space: FiniteSpace, family: str) -> float:
    """Least ``c`` making ``CRelaxed(c)`` / ``CInframetric(c)`` a triangle function.

    The exact ratio bound is computed first, then nudged up ulp by ulp until
    exhaustive verification accepts it under float rounding.
    """
    D = space.matrix
    lhs = D[:, :, None]  # [x, y, z] -> d(x, y)
    a = D[:, None, :]  # d(x, z)
    b = D[None, :, :]  # d(y, z)
    if family == "crelaxed":
        denom, make = a + b, CRelaxed
    elif family == "cinframetric":
        denom, make = np.maximum(a, b), CInframetric
    else:
        raise ConfigurationError(f"unknown constant family {family!r}", "family")
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(denom > 0, lhs / np.where(denom > 0, denom, 1.0), 0.0)
    c = max(1.0, float(ratio.max()))
    for _ in range(64):
        if not verify_triangle_function(space, make(c), "exhaustive"):
            return c
        c = float(np.nextafter(c, INF))
    raise RuntimeError("could not certify constant under float rounding")  # pragma: no cover


# --------------------------------------------------------------------------
# regularity


EXACT = "exact"
LOWER_BOUND = "lower-bound"


@dataclass
class DiagnosticCurve:
    """Sampled function of a nonnegative parameter."""

    params: list[float]
    values: list[float]
    meaning: str  # "ball-diameter" | "lipschitz-modulus"
    exactness: str = EXACT
    notes: list[str] = field(default_factory=list)

    def rows(self) -> Iterator[tuple[float, float, str]]:
        for r, value in zip(self.params, self.values):
            yield r, value, self.exactness

    def __len__(self) -> int:
        return len(self.params)


def ball_diameters(D: np.ndarray, r: float) -> np.ndarray:
    """Diameter of each open ball ``B(p, r)``; index ``p`` runs over rows."""
    inside = D < r
    pair_ok = inside[:, :, None] & inside[:, None, :]
    return np.where(pair_ok, D[None, :, :], 0.0).max(axis=(1, 2))


def regularity_diagnostic(
    space: SemimetricSpace,
    radii: Sequence[float],
    points: Sequence | None = None,
    samples: int = 400,
    rng: np.random.Generator | None = None,
) -> DiagnosticCurve:
    """``max_p diam B(p, r)`` on a grid of radii, reported in increasing ``r``.

    Exact on finite spaces. Continuum spaces are replaced by a finite sample
    (``points`` or ``samples`` random points), giving lower bounds.
    """
    radii = sorted({float(r) for r in radii})
    if not radii:
        raise ConfigurationError("radius grid is empty", "radii")
    if any(r <= 0 for r in radii):
        raise ConfigurationError("radii must be positive", "radii")
    if space.is_finite:
        D, exactness = space.matrix, EXACT
    else:
        if points is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            points = np.unique(space.sample_points(rng, samples))
        D, exactness = materialize(space, points).matrix, LOWER_BOUND
    values = [float(ball_diameters(D, r).max()) for r in radii]
    return DiagnosticCurve(radii, values, "ball-diameter", exactness)


def largest_attained_below(space: FiniteSpace, r: float) -> float:
    """Largest attained distance strictly below ``r`` (0 is always attained)."""
    levels = space.levels()
    return float(levels[np.searchsorted(levels, r, side="left") - 1])
