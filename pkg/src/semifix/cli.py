"""Command-line experiment runner.

    semifix COMMAND --config PATH [--out DIR] [--seed N] [--quiet]

Every command writes ``summary.json`` plus CSV artifacts into the output
directory. Exit status: 0 when all checks pass or the solve converged,
1 on a falsification or non-convergence, 2 on a configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import presets
from .comparison import verify_comparison
from .config import (
    Context,
    build_form,
    build_map,
    build_phi,
    build_policy,
    build_space,
    index_list,
    load_config,
    located,
    need,
    number_list,
    point_list,
    raw_matrix,
)
from .contraction import (
    FiniteMap,
    tightest_comparison_envelope,
    tightest_linear_modulus,
    verify_phi_contraction,
)
from .equivalence import composed_triangle_bound_check, equivalence_diagnostic, FALSIFIED
from .errors import ConfigurationError
from .reports import write_csv, write_json
from .solver import check_residual_majorization, picard_solve, uniqueness_probe
from .spaces import CONTINUUM_TOL, validate_semimetric
from .stability import (
    iterate_bound_violations,
    iterate_convergence_check,
    make_family,
    self_continuity_check,
    stability_run,
)
from .triangle import (
    CInframetric,
    CRelaxed,
    Sum,
    basic_triangle_table,
    check_optimality,
    regularity_diagnostic,
    verify_triangle_function,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

COMPLETENESS_NOTE = (
    "completeness is declared metadata, not certified"
)
PHI_ZERO_NOTE = (
    "arguments below every positive attained distance only admit the witness x = y = p, "
    "so the table reads 0 there by convention"
)


def _mode(cfg: dict, space) -> tuple[str, int]:
    mode = cfg.get("mode", "exhaustive" if space.is_finite else "sample")
    if mode not in ("exhaustive", "sample"):
        raise ConfigurationError(f"unknown mode {mode!r}", "mode")
    return mode, int(cfg.get("samples", 10_000))


def cmd_validate(cfg: dict, ctx: Context) -> tuple[bool, dict]:
    spec = need(cfg, "space")
    tol = float(cfg.get("tol", 0.0))
    matrix = raw_matrix(spec, "space", ctx)
    if matrix is not None:
        with located("space"):
            report = validate_semimetric(matrix, tol)
        violations = [{"kind": v.kind, "i": v.i, "j": v.j, "value": v.value} for v in report]
        summary = {"mode": "exact", "n": int(matrix.shape[0]), "violations": violations}
    else:
        space = build_space(spec, "space", ctx)
        k = int(cfg.get("samples", 10_000))
        x, y = space.sample_pairs(ctx.rng("validate"), k)
        dxy, dyx = space.dist(x, y), space.dist(y, x)
        asym = np.abs(dxy - dyx) > CONTINUUM_TOL * np.maximum(1.0, dxy)
        nonpos = ~(dxy > 0)
        diag = np.abs(space.dist(x, x)) > CONTINUUM_TOL
        violations = (
            [{"kind": "symmetry", "x": float(x[i]), "y": float(y[i])} for i in np.nonzero(asym)[0]]
            + [{"kind": "positivity", "x": float(x[i]), "y": float(y[i])} for i in np.nonzero(nonpos)[0]]
            + [{"kind": "diagonal", "x": float(x[i])} for i in np.nonzero(diag)[0]]
        )
        summary = {"mode": "sampled", "pairs": k, "violations": violations}
    summary["ok"] = not summary["violations"]
    return summary["ok"], summary


def cmd_phi_table(cfg: dict, ctx: Context) -> tuple[bool, dict]:
    space = build_space(need(cfg, "space"), "space", ctx)
    if not space.is_finite:
        raise ConfigurationError("phi-table needs a finite space (give 'points' to sample one)", "space")
    table = basic_triangle_table(space)
    ctx.written.append(write_csv(ctx.out / "phi_table.csv", ("u", "v", "phi"), table.rows()))
    ok = True
    forms = []
    for k, spec in enumerate(cfg.get("forms", [])):
        loc = f"forms.{k}"
        form = build_form(spec, loc, space)
        violations = verify_triangle_function(space, form, "exhaustive")
        entry = {"form": form.describe(), "violations": len(violations)}
        if violations:
            ok = False
            entry["first_violation"] = vars(violations[0])
        else:
            entry["optimality_violations"] = len(check_optimality(table, form))
            ok = ok and entry["optimality_violations"] == 0
        forms.append(entry)
    self_check = verify_triangle_function(space, table.as_form(), "exhaustive")
    ok = ok and not self_check
    summary = {
        "space": space.name,
        "n": space.n,
        "levels": len(table.levels),
        "table_is_triangle_function": not self_check,
        "forms": forms,
        "notes": [PHI_ZERO_NOTE],
    }
    return ok, summary


def _bound_factor(spec: dict, space, loc: str) -> tuple[float, dict]:
    form = build_form(spec, loc, space)
    if isinstance(form, CRelaxed):
        return 2 * form.c, form.describe()
    if isinstance(form, CInframetric):
        return form.c, form.describe()
    if isinstance(form, Sum):
        return 2.0, form.describe()
    raise ConfigurationError("bound must be sum, crelaxed or cinframetric", loc)


def cmd_regularity(cfg: dict, ctx: Context) -> tuple[bool, dict]:
    space = build_space(need(cfg, "space"), "space", ctx)
    radii = number_list(need(cfg, "radii"), "radii")
    with located("radii"):
        curve = regularity_diagnostic(
            space, radii, samples=int(cfg.get("samples", 400)), rng=ctx.rng("regularity")
        )
    ctx.written.append(
        write_csv(ctx.out / "regularity.csv", ("r", "value", "exactness_flag"), curve.rows())
    )
    summary = {"space": space.name, "exactness": curve.exactness, "radii": len(curve)}
    ok = True
    if "bound" in cfg:
        factor, described = _bound_factor(cfg["bound"], space, "bound")
        failures = [r for r, v in zip(curve.params, curve.values) if v > factor * r]
        summary.update(bound=described, bound_factor=factor, bound_failures=failures)
        ok = not failures
    return ok, summary


def cmd_contraction_check(cfg: dict, ctx: Context) -> tuple[bool, dict]:
    space = build_space(need(cfg, "space"), "space", ctx)
    T = build_map(need(cfg, "map"), "map", ctx)
    phi = build_phi(need(cfg, "phi"), "phi")
    with located("mode"):
        mode, k = _mode(cfg, space)
    with located("map"):
        cert = verify_phi_contraction(space, T, phi, mode, k=k, rng=ctx.rng("contraction"))
    summary = {"certificate": cert.to_json()}
    write_json(ctx.out / "certificate.json", cert.to_json())
    if space.is_finite and isinstance(T, FiniteMap):
        env = tightest_comparison_envelope(space, T)
        ctx.written.append(write_csv(ctx.out / "envelope.csv", ("t", "phi"), zip(env.ts, env.values)))
        summary["tightest_linear_modulus"] = tightest_linear_modulus(space, T)
        summary["envelope_comparison_verdict"] = verify_comparison(env, env.ts[env.ts > 0] if len(env.ts) > 1 else [1.0]).verdict
    return cert.verdict != "falsified", summary


def _solve_setup(cfg: dict, ctx: Context):
    space = build_space(need(cfg, "space"), "space", ctx)
    T = build_map(need(cfg, "map"), "map", ctx)
    with located("map"):
        T.check_carrier(space)
    phi = build_phi(cfg["phi"], "phi") if "phi" in cfg else None
    policy = build_policy(cfg.get("policy"), "policy", phi, space)
    return space, T, phi, policy


def cmd_solve(cfg: dict, ctx: Context) -> tuple[bool, dict]:
    space, T, phi, policy = _solve_setup(cfg, ctx)
    start = point_list([cfg.get("start", 0)], "start", space)[0]
    trace = picard_solve(space, T, start, policy)
    ctx.written.append(write_csv(ctx.out / "trace.csv", ("n", "residual"), trace.rows()))
    summary = trace.summary()
    ok = trace.converged
    if phi is not None:
        bad = check_residual_majorization(trace, phi)
        summary["majorization_violations"] = len(bad)
        ok = ok and not bad
    write_json(ctx.out / "trace_summary.json", trace.summary())
    return ok, summary


def cmd_uniqueness(cfg: dict, ctx: Context) -> tuple[bool, dict]:
    space, T, phi, policy = _solve_setup(cfg, ctx)
    starts = point_list(need(cfg, "starts"), "starts", space)
    if len(starts) < 2:
        raise ConfigurationError("need at least two starts", "starts")
    report = uniqueness_probe(space, T, starts, policy)
    summary = report.summary()
    tol = float(cfg.get("tol", 1e-9))
    summary["tol"] = tol
    ok = not report.inconclusive and report.max_distance <= tol
    return ok, summary


def cmd_equivalence(cfg: dict, ctx: Context) -> tuple[bool, dict]:
    s1 = build_space(need(cfg, "d1"), "d1", ctx)
    s2 = build_space(need(cfg, "d2"), "d2", ctx)
    for label, s in (("d1", s1), ("d2", s2)):
        if not s.is_finite:
            raise ConfigurationError("equivalence needs finite carriers (give 'points')", label)
    grid = number_list(need(cfg, "t_grid"), "t_grid")
    with located("d2"):
        report = equivalence_diagnostic(s1, s2, grid, int(cfg.get("plateau_points", 3)))
        bound = composed_triangle_bound_check(s1, s2, brute_force=bool(cfg.get("brute_force", False)))
    ctx.written.append(write_csv(ctx.out / "modulus_d1_d2.csv", ("t", "L"), zip(report.forward.params, report.forward.values)))
    ctx.written.append(write_csv(ctx.out / "modulus_d2_d1.csv", ("t", "L"), zip(report.backward.params, report.backward.values)))
    summary = report.to_json()
    summary["composed_bound_violations"] = len(bound)
    return report.verdict != FALSIFIED and not bound, summary


def cmd_stability(cfg: dict, ctx: Context) -> tuple[bool, dict]:
    space = build_space(need(cfg, "space"), "space", ctx)
    with located("family"):
        seq = make_family(need(cfg, "family"))
        seq.limit.check_carrier(space)
    n_list = index_list(need(cfg, "n_list"), "n_list")
    policy = build_policy(cfg.get("policy"), "policy", seq.phi, space)
    start = point_list([cfg.get("start", 0)], "start", space)[0]
    trend = cfg.get("trend", {})
    report = stability_run(
        space,
        seq,
        n_list,
        policy,
        start=start,
        verify_limit=bool(cfg.get("verify_limit", True)),
        rng=ctx.rng("stability"),
        ratio=float(trend.get("ratio", 0.1)),
        atol=float(trend.get("atol", 1e-3)),
    )
    ctx.written.append(
        write_csv(
            ctx.out / "stability.csv",
            ("n", "x_n", "distance"),
            ((r.n, r.fixed_point, r.distance) for r in report.rows),
        )
    )
    summary = report.summary()
    ok = not report.inconclusive and report.trend_ok and summary["limit_contraction"] != "falsified"

    probes = cfg.get("probes")
    if probes is not None:
        pts = point_list(probes, "probes", space)
        form = basic_triangle_table(space).as_form() if space.is_finite else Sum()
        tol = 0.0 if space.is_finite else float(cfg.get("bound_tol", 1e-12))
        rows, bad = [], 0
        for k in [int(v) for v in cfg.get("k_list", [1, 2, 3])]:
            rows += [(k, n, v) for n, v in iterate_convergence_check(space, seq, k, pts, n_list)]
            bad += len(iterate_bound_violations(space, seq, form, k, pts, n_list, tol))
        ctx.written.append(write_csv(ctx.out / "iterates.csv", ("k", "n", "max_distance"), rows))
        summary["iterate_bound_violations"] = bad
        ok = ok and bad == 0
    sc = cfg.get("self_continuity")
    if sc is not None:
        loc = "self_continuity"
        xs = point_list(need(sc, "xs", loc), f"{loc}.xs", space)
        ys = point_list(need(sc, "ys", loc), f"{loc}.ys", space)
        x, y = point_list([need(sc, "x", loc), need(sc, "y", loc)], loc, space)
        with located(loc):
            rep = self_continuity_check(space, xs, ys, x, y)
        summary["self_continuity_tail_max"] = rep.tail_max
        summary["self_continuity_supported"] = rep.supports_self_continuity()
        ok = ok and rep.supports_self_continuity()
    return ok, summary


COMMANDS: dict[str, Callable[[dict, Context], tuple[bool, dict]]] = {
    "validate": cmd_validate,
    "phi-table": cmd_phi_table,
    "regularity": cmd_regularity,
    "contraction-check": cmd_contraction_check,
    "solve": cmd_solve,
    "uniqueness": cmd_uniqueness,
    "equivalence": cmd_equivalence,
    "stability": cmd_stability,
}


def run_command(command: str, cfg: dict, ctx: Context) -> bool:
    """Run one command, write its ``summary.json``; return whether it passed."""
    if command == "suite":
        return run_suite(cfg, ctx)
    passed, summary = COMMANDS[command](cfg, ctx)
    summary = {"command": command, "passed": passed, "seed": ctx.seed, **summary}
    write_json(ctx.out / "summary.json", summary)
    ctx.log(f"{command}: {'PASS' if passed else 'FAIL'} -> {ctx.out}")
    return passed


def run_suite(cfg: dict, ctx: Context) -> bool:
    name = need(cfg, "preset")
    with located("preset"):
        steps = presets.suite(name)
    results = []
    for label, command, step_cfg in steps:
        with located(f"preset[{name}].{label}"):
            passed = run_command(command, step_cfg, ctx.child(label))
        results.append((label, command, passed))
    ctx.written.append(write_csv(ctx.out / "checks.csv", ("step", "command", "passed"), results))
    ok = all(p for _, _, p in results)
    write_json(
        ctx.out / "summary.json",
        {
            "command": "suite",
            "preset": name,
            "passed": ok,
            "seed": ctx.seed,
            "steps": [{"step": s, "command": c, "passed": p} for s, c, p in results],
            "notes": [COMPLETENESS_NOTE],
        },
    )
    ctx.log(f"suite {name}: {'PASS' if ok else 'FAIL'}")
    return ok


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semifix", description="Fixed-point experiments in semimetric spaces."
    )
    parser.add_argument("command", choices=[*COMMANDS, "suite"])
    parser.add_argument("--config", type=Path, help="experiment config (JSON)")
    parser.add_argument("--out", type=Path, help="output directory (overrides config 'out')")
    parser.add_argument("--seed", type=int, help="random seed (overrides config 'seed')")
    parser.add_argument("--preset", help="suite preset name (shortcut for a config with 'preset')")
    parser.add_argument("--quiet", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
            base = args.config.resolve().parent
        elif args.command == "suite" and args.preset:
            cfg, base = {}, Path.cwd()
        else:
            raise ConfigurationError("--config is required", "config")
        if args.preset:
            cfg["preset"] = args.preset
        seed = args.seed if args.seed is not None else cfg.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigurationError("seed must be an integer", "seed")
        out = args.out if args.out is not None else Path(cfg.get("out", "semifix-out"))
        ctx = Context(out=out, seed=seed, base=base, quiet=args.quiet)
        passed = run_command(args.command, cfg, ctx)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
