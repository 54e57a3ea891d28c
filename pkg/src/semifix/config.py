"""Turn JSON experiment configs into library objects.

Every builder takes the dotted location of the entry it reads so that a bad
config fails with a message like ``space.params.p: p must be ...``.
"""

from __future__ import annotations

import json
import zlib
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .comparison import ComparisonFunction, make_comparison
from .contraction import FiniteMap, SelfMap, load_finite_map, make_map
from .errors import ConfigurationError, SemifixError
from .solver import ExactFinite, TheoryGuided, WindowCauchy
from .spaces import (
    FiniteSpace,
    SemimetricSpace,
    load_matrix,
    load_space,
    make_builtin_space,
    materialize,
    random_finite_space,
)
from .triangle import TriangleForm, make_form, smallest_valid_constant


def _join(outer: str, inner: str) -> str:
    if not inner:
        return outer
    if not outer or inner.startswith(outer + ".") or inner == outer:
        return inner
    return f"{outer}.{inner}"


@contextmanager
def located(location: str):
    """Re-raise any config-level failure as a ``ConfigurationError`` at ``location``."""
    try:
        yield
    except ConfigurationError as exc:
        msg = str(exc)
        if exc.location and msg.startswith(exc.location + ": "):
            msg = msg[len(exc.location) + 2:]
        raise ConfigurationError(msg, _join(location, exc.location)) from None
    except (SemifixError, KeyError, TypeError, ValueError, OSError) as exc:
        detail = f"missing key {exc.args[0]!r}" if isinstance(exc, KeyError) else str(exc)
        raise ConfigurationError(detail, location) from None


@dataclass
class Context:
    """Per-run state: config directory, output directory, seed."""

    out: Path
    seed: int = 0
    base: Path = field(default_factory=Path.cwd)
    quiet: bool = False
    written: list[Path] = field(default_factory=list)

    def rng(self, stream: str) -> np.random.Generator:
        """Independent generator per named stream, all derived from the one seed."""
        return np.random.default_rng([self.seed, zlib.crc32(stream.encode())])

    def child(self, name: str) -> "Context":
        return Context(self.out / name, self.seed, self.base, self.quiet, self.written)

    def log(self, msg: str) -> None:
        if not self.quiet:
            print(msg)


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} does not exist", "config")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from None
    if not isinstance(data, dict):
        raise ConfigurationError("top level must be a JSON object", str(path))
    return data


def need(cfg: dict, key: str, loc: str = ""):
    if not isinstance(cfg, dict):
        raise ConfigurationError("expected an object", loc)
    if key not in cfg:
        raise ConfigurationError(f"missing required key {key!r}", _join(loc, key))
    return cfg[key]


def build_space(spec, loc: str, ctx: Context) -> SemimetricSpace:
    with located(loc):
        if not isinstance(spec, dict):
            raise ConfigurationError("space must be an object")
        if "matrix" in spec:
            return FiniteSpace(spec["matrix"])
        if "file" in spec:
            path = ctx.base / spec["file"]
            if not path.exists():
                raise ConfigurationError(f"file {path} does not exist", "file")
            return load_space(path)
        if "random" in spec:
            r = spec["random"]
            return random_finite_space(int(r["n"]), ctx.rng(f"space:{r.get('stream', 0)}"))
        space = make_builtin_space(need(spec, "name"), spec.get("params", {}))
        if "points" in spec:
            return materialize(space, spec["points"])
        return space


def raw_matrix(spec, loc: str, ctx: Context) -> np.ndarray | None:
    """Unvalidated matrix behind a space entry, or ``None`` for continuum builtins."""
    with located(loc):
        if "matrix" in spec:
            return np.asarray(spec["matrix"], dtype=float)
        if "file" in spec:
            return load_matrix(ctx.base / spec["file"])
    space = build_space(spec, loc, ctx)
    return space.matrix if space.is_finite else None


def build_map(spec, loc: str, ctx: Context) -> SelfMap:
    with located(loc):
        if not isinstance(spec, dict):
            raise ConfigurationError("map must be an object")
        if "file" in spec:
            return load_finite_map(ctx.base / spec["file"])
        if "indices" in spec:
            return FiniteMap(tuple(spec["indices"]))
        return make_map(need(spec, "name"), spec.get("params", {}))


def build_phi(spec, loc: str) -> ComparisonFunction:
    with located(loc):
        if not isinstance(spec, dict):
            raise ConfigurationError("comparison function must be an object")
        return make_comparison(spec)


def build_form(spec, loc: str, space: SemimetricSpace | None = None) -> TriangleForm:
    """Closed-form triangle function; ``"c": "auto"`` picks the least valid constant on a finite space."""
    with located(loc):
        if not isinstance(spec, dict):
            raise ConfigurationError("triangle form must be an object")
        if spec.get("c") == "auto":
            if space is None or not space.is_finite:
                raise ConfigurationError("c='auto' needs a finite space", "c")
            spec = dict(spec, c=smallest_valid_constant(space, spec.get("variant")))
        return make_form(spec)


def build_policy(spec, loc: str, phi: ComparisonFunction | None = None, space=None):
    spec = spec or {"variant": "window_cauchy"}
    with located(loc):
        variant = spec.get("variant", "window_cauchy")
        cap = int(spec.get("cap", 10**6))
        if variant == "window_cauchy":
            return WindowCauchy(float(spec.get("tol", 1e-9)), int(spec.get("window", 3)), cap)
        if variant == "exact_finite":
            return ExactFinite(cap)
        if variant == "theory_guided":
            if phi is None:
                raise ConfigurationError("theory_guided needs a top-level 'phi'", "variant")
            form = build_form(need(spec, "form"), "form", space)
            return TheoryGuided(float(need(spec, "eps")), form, phi, cap)
        raise ConfigurationError(
            f"unknown policy {variant!r}; known: window_cauchy, exact_finite, theory_guided", "variant"
        )


def point_list(values, loc: str, space: SemimetricSpace) -> list:
    with located(loc):
        if not isinstance(values, list) or not values:
            raise ConfigurationError("expected a nonempty list of points")
        pts = [int(v) if space.is_finite else float(v) for v in values]
        for k, p in enumerate(pts):
            if not space.contains(p):
                raise ConfigurationError(f"{p!r} is not a point of {space.name}", str(k))
        return pts


def number_list(values, loc: str) -> list[float]:
    with located(loc):
        if not isinstance(values, list) or not values:
            raise ConfigurationError("expected a nonempty list of numbers")
        return [float(v) for v in values]


def index_list(spec, loc: str) -> list[int]:
    """Explicit list, or ``{"start": a, "stop": b}`` (inclusive), or ``{"geometric": [a, b]}`` powers of two."""
    with located(loc):
        if isinstance(spec, list) and spec:
            return [int(v) for v in spec]
        if isinstance(spec, dict) and "start" in spec:
            return list(range(int(spec["start"]), int(spec["stop"]) + 1))
        if isinstance(spec, dict) and "geometric" in spec:
            lo, hi = (int(v) for v in spec["geometric"])
            out, n = [], lo
            while n <= hi:
                out.append(n)
                n *= 2
            return out
        raise ConfigurationError("expected a list of indices or a range object")
