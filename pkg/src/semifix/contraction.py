"""Self-maps and checks of the contraction inequality ``d(Tx, Ty) <= phi(d(x, y))``."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .comparison import ComparisonFunction, TabulatedMonotone
from .errors import ConfigurationError, ModeError
from .spaces import CONTINUUM_TOL, FiniteSpace, SemimetricSpace
from .triangle import exceeds


class SelfMap:
    name = "map"

    def __call__(self, x):
        raise NotImplementedError

    def check_carrier(self, space: SemimetricSpace) -> None:
        """Raise ``ConfigurationError`` unless the map sends the carrier into itself."""

    def describe(self) -> dict:
        return {"name": self.name}


@dataclass(frozen=True)
class FiniteMap(SelfMap):
    indices: tuple[int, ...]
    name = "finite"

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        n = len(self.indices)
        if n == 0 or any(not 0 <= i < n for i in self.indices):
            raise ConfigurationError(f"finite map entries must lie in [0, {n})", "indices")

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.asarray(self.indices)[x]
        return self.indices[x]

    def check_carrier(self, space: SemimetricSpace) -> None:
        if not space.is_finite or space.n != len(self.indices):
            raise ConfigurationError(
                f"finite map of length {len(self.indices)} does not fit space {space.name}", "map"
            )

    def describe(self) -> dict:
        return {"name": self.name, "indices": list(self.indices)}


@dataclass(frozen=True)
class Affine1D(SelfMap):
    """``x -> alpha x + beta`` on the line."""

    alpha: float
    beta: float
    name = "affine1d"

    def __call__(self, x):
        return self.alpha * x + self.beta

    def check_carrier(self, space: SemimetricSpace) -> None:
        if space.is_finite:
            raise ConfigurationError("affine1d acts on a line, not a finite space", "map")
        if space.half_line and (self.alpha < 0 or self.beta < 0):
            raise ConfigurationError("affine1d leaves the half-line unless alpha, beta >= 0", "map")

    def describe(self) -> dict:
        return {"name": self.name, "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class Rational1D(SelfMap):
    """``x -> x / (1 + x) + shift`` on the half-line."""

    shift: float = 0.0
    name = "rational1d"

    def __post_init__(self):
        if self.shift < 0:
            raise ConfigurationError("rational1d shift must be >= 0", "shift")

    def __call__(self, x):
        return x / (1 + x) + self.shift

    def check_carrier(self, space: SemimetricSpace) -> None:
        if space.is_finite or not space.half_line:
            raise ConfigurationError("rational1d needs a half-line space", "map")

    def describe(self) -> dict:
        return {"name": self.name, "shift": self.shift}


@dataclass(frozen=True)
class Constant(SelfMap):
    value: float
    name = "constant"

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.full(x.shape, self.value, dtype=np.asarray(self.value).dtype)
        return self.value

    def check_carrier(self, space: SemimetricSpace) -> None:
        if not space.contains(self.value):
            raise ConfigurationError(f"constant {self.value} is not a point of {space.name}", "map")

    def describe(self) -> dict:
        return {"name": self.name, "value": self.value}


MAPS: dict[str, Callable[[dict], SelfMap]] = {
    "finite": lambda p: FiniteMap(tuple(p["indices"])),
    "affine1d": lambda p: Affine1D(float(p["alpha"]), float(p["beta"])),
    "rational1d": lambda p: Rational1D(float(p.get("shift", 0.0))),
    "constant": lambda p: Constant(p["value"]),
}


def make_map(name: str, params: dict | None = None) -> SelfMap:
    if name not in MAPS:
        raise ConfigurationError(f"unknown map {name!r}; known: {', '.join(MAPS)}", "name")
    try:
        return MAPS[name](dict(params or {}))
    except KeyError as exc:
        raise ConfigurationError(f"missing parameter {exc.args[0]!r}", f"params.{exc.args[0]}") from None


def load_finite_map(path: str | Path) -> FiniteMap:
    """JSON file holding an index array, bare or as ``{"indices": [...]}``."""
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("indices")
    if not isinstance(data, list):
        raise ConfigurationError("expected an index array", str(path))
    return FiniteMap(tuple(data))


# --------------------------------------------------------------------------
# certificates

VERIFIED = "verified"
NOT_FALSIFIED = "not-falsified"
FALSIFIED = "falsified"


@dataclass
class ContractionCertificate:
    map: SelfMap
    phi: ComparisonFunction
    mode: str
    checked: int
    violations: list[tuple[object, object, float, float]] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.violations:
            return FALSIFIED
        return VERIFIED if self.mode == "exhaustive" else NOT_FALSIFIED

    def to_json(self, max_witnesses: int = 100) -> dict:
        return {
            "map": self.map.describe(),
            "phi": self.phi.describe(),
            "mode": self.mode,
            "pairs_checked": self.checked,
            "verdict": self.verdict,
            "violation_count": len(self.violations),
            "witnesses": [
                {"x": x, "y": y, "d_image": lhs, "phi_d": rhs}
                for x, y, lhs, rhs in self.violations[:max_witnesses]
            ],
        }


def verify_phi_contraction(
    space: SemimetricSpace,
    T: SelfMap,
    phi: ComparisonFunction,
    mode: str = "exhaustive",
    k: int = 10_000,
    rng: np.random.Generator | None = None,
    tol: float | None = None,
) -> ContractionCertificate:
    """Check ``d(Tx, Ty) <= phi(d(x, y))`` on all (or ``k`` sampled) pairs ``x != y``.

    Continuum pairs are stratified across decades of separation.
    """
    T.check_carrier(space)
    if tol is None:
        tol = 0.0 if space.is_finite else CONTINUUM_TOL
    if mode == "exhaustive":
        if not space.is_finite:
            raise ModeError(f"exhaustive contraction check needs a finite space, got {space.name}")
        x, y = np.triu_indices(space.n, k=1)
    elif mode == "sample":
        rng = rng if rng is not None else np.random.default_rng(0)
        if space.is_finite:
            x = rng.integers(0, space.n, size=k)
            y = rng.integers(0, space.n, size=k)
            keep = x != y
            x, y = x[keep], y[keep]
        else:
            x, y = space.sample_pairs(rng, k)
    else:
        raise ConfigurationError(f"unknown mode {mode!r}", "mode")
    lhs = np.asarray(space.dist(T(x), T(y)), dtype=float)
    rhs = np.asarray(phi(space.dist(x, y)), dtype=float)
    cast = int if space.is_finite else float
    bad = np.nonzero(exceeds(lhs, rhs, tol))[0]
    violations = [(cast(x[i]), cast(y[i]), float(lhs[i]), float(rhs[i])) for i in bad]
    return ContractionCertificate(T, phi, mode, len(x), violations)


def _pair_arrays(space: FiniteSpace, T: FiniteMap) -> tuple[np.ndarray, np.ndarray]:
    T.check_carrier(space)
    x, y = np.triu_indices(space.n, k=1)
    idx = np.asarray(T.indices)
    return space.matrix[x, y], space.matrix[idx[x], idx[y]]


def tightest_linear_modulus(space: FiniteSpace, T: FiniteMap) -> float:
    """``max d(Tx, Ty) / d(x, y)`` over ``x != y`` (0 on a one-point space)."""
    d, dT = _pair_arrays(space, T)
    if d.size == 0:
        return 0.0
    return float((dT / d).max())


def tightest_comparison_envelope(space: FiniteSpace, T: FiniteMap) -> TabulatedMonotone:
    """Least increasing ``phi`` with ``d(Tx, Ty) <= phi(d(x, y))``, tabulated on attained distances.

    ``phi*(t) = max{ d(Tx, Ty) : d(x, y) <= t }``. It is only a candidate: run
    ``verify_comparison`` on it before relying on it as a comparison function.
    """
    d, dT = _pair_arrays(space, T)
    levels = space.levels()
    best = np.zeros(len(levels))
    np.maximum.at(best, np.searchsorted(levels, d), dT)
    return TabulatedMonotone(levels, np.maximum.accumulate(best))
