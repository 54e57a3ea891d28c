"""Preset experiment suites.

Each preset is a list of ``(step label, command, config)`` triples; the
``suite`` command runs them in order, one output subdirectory per step. They
exercise unique fixed points of phi-contractions on c-relaxed, c-inframetric,
metric, ultrametric and equivalent-to-metric spaces.
"""

from __future__ import annotations

from .errors import ConfigurationError

RADII = [0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0]
LINE_POINTS = [0.0, 0.1, 0.25, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0, 4.5]
GEOMETRIC = [2**j for j in range(13)]


def _power_space(p: float, half: bool = False) -> dict:
    return {"name": "half_line_power_p" if half else "real_line_power_p", "params": {"p": p}}


def _line_contraction(space: dict, phi: dict, map_spec: dict, starts: list, start, extra_solve=()) -> list:
    base = {"space": space, "map": map_spec, "phi": phi}
    steps = [
        ("contraction", "contraction-check", {**base, "mode": "sample", "samples": 10_000}),
        ("solve", "solve", {**base, "start": start}),
    ]
    steps += list(extra_solve)
    steps.append(("uniqueness", "uniqueness", {**base, "starts": starts, "tol": 1e-6}))
    return steps


def matkowski1_crelaxed() -> list:
    space = _power_space(2.0)
    finite = {"random": {"n": 8, "stream": 1}}
    affine = {"name": "affine1d", "params": {"alpha": 0.5, "beta": 1.0}}
    phi = {"variant": "linear", "q": 0.25}
    theory = (
        "solve-theory",
        "solve",
        {
            "space": space,
            "map": affine,
            "phi": phi,
            "start": 0,
            "policy": {"variant": "theory_guided", "eps": 1e-6, "form": {"variant": "crelaxed", "c": 2}},
        },
    )
    return [
        ("validate", "validate", {"space": space, "samples": 10_000}),
        (
            "phi-table",
            "phi-table",
            {"space": finite, "forms": [{"variant": "crelaxed", "c": "auto"}, {"variant": "cinframetric", "c": "auto"}]},
        ),
        ("regularity-finite", "regularity", {"space": finite, "radii": RADII, "bound": {"variant": "crelaxed", "c": "auto"}}),
        ("regularity-sampled", "regularity", {"space": space, "radii": RADII, "samples": 300, "bound": {"variant": "crelaxed", "c": 2}}),
        *_line_contraction(space, phi, affine, [-10, 0, 10], 0, [theory]),
    ]


def matkowski1_cinframetric() -> list:
    space = _power_space(2.0, half=True)
    finite = {"random": {"n": 8, "stream": 2}}
    return [
        ("validate", "validate", {"space": space, "samples": 10_000}),
        ("phi-table", "phi-table", {"space": finite, "forms": [{"variant": "cinframetric", "c": "auto"}]}),
        ("regularity-finite", "regularity", {"space": finite, "radii": RADII, "bound": {"variant": "cinframetric", "c": "auto"}}),
        ("regularity-sampled", "regularity", {"space": space, "radii": RADII, "samples": 300, "bound": {"variant": "cinframetric", "c": 4}}),
        *_line_contraction(
            space,
            {"variant": "rational_decay", "a": 1.0},
            {"name": "rational1d"},
            [0.1, 1.0, 5.0],
            1.0,
        ),
    ]


def matkowski2_metric() -> list:
    space = {"name": "real_line_abs"}
    return [
        ("validate", "validate", {"space": space, "samples": 10_000}),
        (
            "stability",
            "stability",
            {
                "space": space,
                "family": {"name": "affine_shift", "alpha": 0.5, "beta": 1.0},
                "n_list": {"geometric": [1, 4096]},
                "start": 0,
                "probes": [-1.0, 0.0, 2.5],
                "k_list": [1, 2, 3],
                "self_continuity": {
                    "xs": [1.0 / m for m in GEOMETRIC[1:]],
                    "ys": [1.0 - 1.0 / m for m in GEOMETRIC[1:]],
                    "x": 0.0,
                    "y": 1.0,
                },
            },
        ),
    ]


def matkowski2_ultrametric() -> list:
    space = {"name": "discrete_ultrametric", "params": {"n": 6}}
    return [
        ("validate", "validate", {"space": space}),
        ("phi-table", "phi-table", {"space": space, "forms": [{"variant": "max"}]}),
        ("regularity", "regularity", {"space": space, "radii": RADII}),
        (
            "stability",
            "stability",
            {
                "space": space,
                "family": {"name": "eventually_constant", "n": 6, "target": 2, "early": 4, "switch": 5},
                "n_list": {"start": 1, "stop": 20},
                "policy": {"variant": "exact_finite"},
                "start": 0,
                "probes": [0, 1, 2, 3, 4, 5],
                "k_list": [1, 2, 3],
                "self_continuity": {"xs": [0, 0] + [1] * 18, "ys": [0, 0] + [2] * 18, "x": 1, "y": 2},
            },
        ),
    ]


def extension() -> list:
    cubic = {**_power_space(3.0), "points": LINE_POINTS}
    line = {"name": "real_line_abs", "points": LINE_POINTS}
    return [
        (
            "equivalence",
            "equivalence",
            {"d1": cubic, "d2": line, "t_grid": [2.0, 1.0, 0.5, 0.2, 0.1, 0.05, 0.01], "brute_force": True},
        ),
        ("regularity", "regularity", {"space": cubic, "radii": RADII, "bound": {"variant": "crelaxed", "c": "auto"}}),
        *_line_contraction(
            _power_space(3.0),
            {"variant": "linear", "q": 0.125},
            {"name": "affine1d", "params": {"alpha": 0.5, "beta": 1.0}},
            [-10, 0, 10],
            0,
        ),
    ]


PRESETS = {
    "matkowski1-crelaxed": matkowski1_crelaxed,
    "matkowski1-cinframetric": matkowski1_cinframetric,
    "matkowski2-metric": matkowski2_metric,
    "matkowski2-ultrametric": matkowski2_ultrametric,
    "extension": extension,
}


def suite(name: str) -> list:
    if name not in PRESETS:
        raise ConfigurationError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    return PRESETS[name]()
