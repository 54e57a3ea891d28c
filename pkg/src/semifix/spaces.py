"""Semimetric spaces: finite matrix spaces, sampled continuum spaces, builtins.

A finite space is a validated n x n distance matrix whose points are the
indices ``0..n-1``. A continuum space is a subset of the real line (the whole
line or the closed half-line) with a closed-form distance; it can only be
explored through samples, so every supremum computed on one is a lower bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import ConfigurationError, ShapeError

COMPLETE = "complete"
UNKNOWN = "unknown"

#: float noise tolerance for closed-form (continuum) distance checks
CONTINUUM_TOL = 1e-12


# --------------------------------------------------------------------------
# axiom validation


@dataclass(frozen=True)
class Violation:
    kind: str  # "symmetry" | "diagonal" | "positivity" | "nonfinite"
    i: int
    j: int
    value: float


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]


def validate_semimetric(matrix, tol: float = 0.0) -> ValidationReport:
    """Check the semimetric axioms on a square matrix.

    Reports asymmetric pairs (once per unordered pair, at ``(i, j)`` with
    ``i < j``), diagonal entries with absolute value above ``tol`` and
    off-diagonal entries that are not strictly above ``tol``. The triangle
    inequality is deliberately not checked.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"distance matrix must be square, got shape {m.shape}")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    n = m.shape[0]
    report = ValidationReport()
    bad = ~np.isfinite(m)
    for i, j in zip(*np.nonzero(bad)):
        report.violations.append(Violation("nonfinite", int(i), int(j), float(m[i, j])))
    for i in range(n):
        if not bad[i, i] and abs(m[i, i]) > tol:
            report.violations.append(Violation("diagonal", i, i, float(m[i, i])))
    iu, ju = np.triu_indices(n, k=1)
    upper, lower = m[iu, ju], m[ju, iu]
    with np.errstate(invalid="ignore"):
        asym = np.abs(upper - lower) > tol
        nonpos = (upper <= tol) | (lower <= tol)
    for k in np.nonzero(asym)[0]:
        report.violations.append(
            Violation("symmetry", int(iu[k]), int(ju[k]), float(upper[k] - lower[k]))
        )
    for k in np.nonzero(nonpos)[0]:
        report.violations.append(
            Violation("positivity", int(iu[k]), int(ju[k]), float(min(upper[k], lower[k])))
        )
    return report


# --------------------------------------------------------------------------
# spaces


class SemimetricSpace:
    """Common surface of finite and continuum spaces."""

    name: str
    params: dict
    completeness: str
    is_finite: bool

    def dist(self, x, y):
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError


class FiniteSpace(SemimetricSpace):
    """Finite semimetric space given by its distance matrix."""

    is_finite = True

    def __init__(
        self,
        matrix,
        name: str = "matrix_space",
        params: dict | None = None,
        completeness: str = COMPLETE,
        validate: bool = True,
        tol: float = 0.0,
    ):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ShapeError(f"distance matrix must be square, got shape {m.shape}")
        if m.shape[0] == 0:
            raise ShapeError("a semimetric space needs at least one point")
        if validate:
            report = validate_semimetric(m, tol)
            if not report.ok:
                first = report.violations[0]
                raise ConfigurationError(
                    f"matrix is not a semimetric: {len(report)} violation(s), first "
                    f"{first.kind} at ({first.i}, {first.j})"
                )
        m.setflags(write=False)
        self.matrix = m
        self.name = name
        self.params = dict(params or {})
        self.completeness = completeness
        self._levels: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"FiniteSpace(name={self.name!r}, n={self.n})"

    def points(self) -> range:
        return range(self.n)

    def contains(self, x) -> bool:
        return isinstance(x, (int, np.integer)) and 0 <= int(x) < self.n

    def dist(self, x, y):
        return self.matrix[x, y]

    def levels(self) -> np.ndarray:
        """Sorted attained distance values, 0 included."""
        if self._levels is None:
            lv = np.unique(self.matrix)
            lv.setflags(write=False)
            self._levels = lv
        return self._levels

    def diameter(self) -> float:
        return float(self.matrix.max())

    def to_json(self) -> dict:
        return {"n": self.n, "matrix": self.matrix.tolist()}


class ContinuumSpace(SemimetricSpace):
    """The real line or the half-line ``[0, inf)`` with a closed-form distance.

    ``distance`` must work elementwise on floats and numpy arrays.
    """

    is_finite = False

    def __init__(
        self,
        name: str,
        distance: Callable,
        lower: float = -math.inf,
        params: dict | None = None,
        completeness: str = COMPLETE,
        center_decades: tuple[float, float] = (-3.0, 3.0),
        gap_decades: tuple[float, float] = (-6.0, 3.0),
    ):
        self.name = name
        self._distance = distance
        self.lower = lower
        self.params = dict(params or {})
        self.completeness = completeness
        self.center_decades = center_decades
        self.gap_decades = gap_decades

    def __repr__(self) -> str:
        return f"ContinuumSpace(name={self.name!r}, params={self.params!r})"

    @property
    def half_line(self) -> bool:
        return self.lower == 0.0

    def dist(self, x, y):
        return self._distance(x, y)

    def contains(self, x) -> bool:
        try:
            v = float(x)
        except (TypeError, ValueError):
            return False
        return math.isfinite(v) and v >= self.lower

    # Sampling. Centers and gaps are spread log-uniformly across decades so
    # that both tiny and large separations are exercised.

    def sample_points(self, rng: np.random.Generator, k: int) -> np.ndarray:
        lo, hi = self.center_decades
        mags = 10.0 ** rng.uniform(lo, hi, size=k)
        if self.half_line:
            return mags
        signs = rng.choice([-1.0, 1.0], size=k)
        return signs * mags

    def _offset(self, rng: np.random.Generator, base: np.ndarray) -> np.ndarray:
        lo, hi = self.gap_decades
        gaps = 10.0 ** rng.uniform(lo, hi, size=base.shape)
        signs = rng.choice([-1.0, 1.0], size=base.shape)
        out = base + signs * gaps
        if self.half_line:
            out = np.where(out < 0, base + gaps, out)
        return out

    def sample_pairs(self, rng: np.random.Generator, k: int) -> tuple[np.ndarray, np.ndarray]:
        """``k`` pairs ``(x, y)`` with ``x != y``, stratified by separation."""
        x = self.sample_points(rng, k)
        y = self._offset(rng, x)
        same = x == y
        while same.any():
            y[same] = self._offset(rng, x[same])
            same = x == y
        return x, y

    def sample_triples(
        self, rng: np.random.Generator, k: int
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``k`` triples ``(x, y, z)`` clustered around a common pivot ``z``."""
        z = self.sample_points(rng, k)
        return self._offset(rng, z), self._offset(rng, z), z


def materialize(space: SemimetricSpace, points: Sequence, name: str | None = None) -> FiniteSpace:
    """Finite subspace on the given (distinct) points."""
    if space.is_finite:
        idx = np.asarray(points, dtype=int)
        m = space.matrix[np.ix_(idx, idx)]
    else:
        pts = np.asarray(points, dtype=float)
        m = space.dist(pts[:, None], pts[None, :])
        np.fill_diagonal(m, 0.0)
    return FiniteSpace(
        m,
        name=name or f"{space.name}_sample",
        params={"points": [float(p) for p in points]},
        completeness=space.completeness,
    )


# --------------------------------------------------------------------------
# builtins


def _require(params: dict, key: str, name: str):
    if key not in params:
        raise ConfigurationError(f"builtin space {name!r} needs parameter {key!r}", "params")
    return params[key]


def _positive(params: dict, key: str, name: str) -> float:
    value = float(_require(params, key, name))
    if not value > 0 or not math.isfinite(value):
        raise ConfigurationError(f"{key} must be a positive finite number, got {value}", f"params.{key}")
    return value


def _count(params: dict, key: str, name: str, minimum: int = 1) -> int:
    value = _require(params, key, name)
    if isinstance(value, bool) or int(value) != value or int(value) < minimum:
        raise ConfigurationError(f"{key} must be an integer >= {minimum}, got {value!r}", f"params.{key}")
    return int(value)


def _power(p: float) -> Callable:
    if p == 1.0:
        return lambda x, y: abs(x - y)
    return lambda x, y: abs(x - y) ** p


def discrete_matrix(n: int) -> np.ndarray:
    return np.ones((n, n)) - np.eye(n)


def nonregular_fan_matrix(N: int) -> np.ndarray:
    """Fan space: hub ``p`` (index 0), spokes ``a_i`` (index i) and ``b_i`` (index N+i).

    ``d(p, a_i) = d(p, b_i) = 1/i``, ``d(a_i, b_i) = 1``, every other
    off-diagonal distance is 2. Balls around the hub of any radius above
    ``1/i`` contain a pair at distance 1, so ball diameters do not shrink.
    """
    size = 2 * N + 1
    m = np.full((size, size), 2.0)
    np.fill_diagonal(m, 0.0)
    for i in range(1, N + 1):
        a, b = i, N + i
        m[0, a] = m[a, 0] = m[0, b] = m[b, 0] = 1.0 / i
        m[a, b] = m[b, a] = 1.0
    return m


def fan_index(N: int, role: str, i: int = 0) -> int:
    """Index of ``p``, ``a_i`` or ``b_i`` in the fan space."""
    if role == "p":
        return 0
    if not 1 <= i <= N:
        raise ValueError(f"spoke index must be in 1..{N}")
    return i if role == "a" else N + i


def _real_line_abs(params: dict) -> ContinuumSpace:
    return ContinuumSpace("real_line_abs", _power(1.0), params=params)


def _real_line_power_p(params: dict) -> ContinuumSpace:
    p = _positive(params, "p", "real_line_power_p")
    return ContinuumSpace("real_line_power_p", _power(p), params={"p": p})


def _half_line_abs(params: dict) -> ContinuumSpace:
    return ContinuumSpace("half_line_abs", _power(1.0), lower=0.0, params=params)


def _half_line_power_p(params: dict) -> ContinuumSpace:
    p = _positive(params, "p", "half_line_power_p")
    return ContinuumSpace("half_line_power_p", _power(p), lower=0.0, params={"p": p})


def _discrete_ultrametric(params: dict) -> FiniteSpace:
    n = _count(params, "n", "discrete_ultrametric")
    return FiniteSpace(discrete_matrix(n), name="discrete_ultrametric", params={"n": n})


def _matrix_space(params: dict) -> FiniteSpace:
    matrix = _require(params, "matrix", "matrix_space")
    return FiniteSpace(matrix, name="matrix_space")


def _nonregular_family_N(params: dict) -> FiniteSpace:
    N = _count(params, "N", "nonregular_family_N")
    return FiniteSpace(nonregular_fan_matrix(N), name="nonregular_family_N", params={"N": N})


BUILTIN_SPACES: dict[str, Callable[[dict], SemimetricSpace]] = {
    "real_line_abs": _real_line_abs,
    "real_line_power_p": _real_line_power_p,
    "half_line_abs": _half_line_abs,
    "half_line_power_p": _half_line_power_p,
    "discrete_ultrametric": _discrete_ultrametric,
    "matrix_space": _matrix_space,
    "nonregular_family_N": _nonregular_family_N,
}


def make_builtin_space(name: str, params: dict | None = None) -> SemimetricSpace:
    try:
        factory = BUILTIN_SPACES[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown space {name!r}; known: {', '.join(sorted(BUILTIN_SPACES))}", "name"
        ) from None
    return factory(dict(params or {}))


# --------------------------------------------------------------------------
# random instances and file formats


def random_semimetric_matrix(
    n: int, rng: np.random.Generator, low: float = 0.1, high: float = 2.0
) -> np.ndarray:
    """Symmetric, zero diagonal, off-diagonal i.i.d. uniform on ``[low, high]``."""
    m = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    m[iu] = rng.uniform(low, high, size=len(iu[0]))
    return m + m.T


def random_finite_space(n: int, rng: np.random.Generator, **kwargs) -> FiniteSpace:
    return FiniteSpace(random_semimetric_matrix(n, rng, **kwargs), name="random")


def load_matrix(path: str | Path) -> np.ndarray:
    """Read a distance matrix from headerless CSV or ``{"n": .., "matrix": ..}`` JSON."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text())
        if not isinstance(data, dict) or "matrix" not in data:
            raise ConfigurationError("JSON matrix file needs a 'matrix' key", str(path))
        m = np.asarray(data["matrix"], dtype=float)
        if "n" in data and (m.ndim != 2 or m.shape != (data["n"], data["n"])):
            raise ShapeError(f"{path}: declared n={data['n']} but matrix has shape {m.shape}")
    else:
        m = np.loadtxt(path, delimiter=",", ndmin=2)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError(f"{path}: distance matrix must be square, got shape {m.shape}")
    return m


def load_space(path: str | Path) -> FiniteSpace:
    return FiniteSpace(load_matrix(path), name=Path(path).stem)
