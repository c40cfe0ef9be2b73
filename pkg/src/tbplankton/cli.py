"""Command-line front end.

Exit codes: 0 success, 2 usage or validation error, 3 the run ended in a
domain violation or solver failure (outputs are still written).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import boubaker
from .bpes import BpesConfig, characteristic_time, compare_with_reference, solve
from .config import RunConfig, OutputSpec, default_output_dir, dumps, load_config
from .dynamics import (SWEEPABLE, SweepSpec, classify, phase_portrait_data, sweep, sweep_csv,
                       trajectory_csv)
from .errors import ArgumentDomainError, PlanktonError, ValidationError
from .integrate import Terminal, integrate
from .model import ModelParams, State, equilibria
from .stability import stability_report

EXIT_OK, EXIT_USAGE, EXIT_TERMINAL = 0, 2, 3


def _add_model_flags(ap: argparse.ArgumentParser) -> None:
    g = ap.add_argument_group("model")
    for name in ("alpha", "lambda", "beta", "gamma", "mu"):
        g.add_argument(f"--{name}", type=float, default=None)
    ap.add_argument("--x0", type=float, default=None)
    ap.add_argument("--y0", type=float, default=None)
    ap.add_argument("--config", type=Path, default=None, help="JSON run configuration")


def _add_run_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--t-end", type=float, default=None)
    ap.add_argument("--rel-tol", type=float, default=None)
    ap.add_argument("--abs-tol", type=float, default=None)
    ap.add_argument("--out", type=Path, default=None, help="output directory")


def _base_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    model = cfg.model.to_dict()
    for name in ("alpha", "lambda", "beta", "gamma", "mu"):
        value = getattr(args, name)
        if value is not None:
            model[name] = value
    initial = cfg.initial
    if args.x0 is not None or args.y0 is not None:
        initial = State(args.x0 if args.x0 is not None else initial.x,
                        args.y0 if args.y0 is not None else initial.y)
    changes = {"model": ModelParams.from_dict(model), "initial": initial}
    for flag, key in (("t_end", "t_end"), ("rel_tol", "rel_tol"), ("abs_tol", "abs_tol")):
        if getattr(args, flag, None) is not None:
            changes[key] = getattr(args, flag)
    return replace(cfg, **changes)


def _out_dir(args, cfg: RunConfig) -> Path:
    if args.out is not None:
        path = args.out
    elif args.config is not None:
        path = Path(cfg.output.directory)
    else:
        path = default_output_dir()
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def _equilibrium_lines(p: ModelParams) -> list[str]:
    return [f"  {e.kind.value}: x = {e.state.x:.10g}, y = {e.state.y:.10g}" for e in equilibria(p)]


def cmd_simulate(args) -> int:
    cfg = _base_config(args)
    if args.method is not None:
        cfg = replace(cfg, method=args.method)
    if args.points is not None:
        cfg = replace(cfg, output=OutputSpec(cfg.output.directory, args.points))
    if cfg.method == "bpes":
        bpes = cfg.bpes or BpesConfig(x0=cfg.initial.x, y0=cfg.initial.y)
        overrides = {"x0": cfg.initial.x, "y0": cfg.initial.y}
        if args.n0 is not None:
            overrides["n0"] = args.n0
        if args.t_m is not None:
            overrides["t_m"] = args.t_m
        if args.quadrature_nodes is not None:
            overrides["quadrature_nodes"] = args.quadrature_nodes
        cfg = replace(cfg, bpes=BpesConfig.from_dict({**bpes.to_dict(), **overrides}))
    out = _out_dir(args, cfg)
    p = cfg.model

    traj = integrate(p, cfg.initial, cfg.t_end, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol)
    portrait = phase_portrait_data(traj, cfg.output.points)
    _write(out / "trajectory.csv", trajectory_csv(traj))
    _write(out / "timeseries.csv", portrait.time_series_csv())
    _write(out / "orbit.csv", portrait.orbit_csv())
    _write(out / "run.json", dumps(cfg.to_dict()))

    status = EXIT_OK
    try:
        label = classify(traj, p)
        print(f"regime: {label.kind.value}")
        result = {"label": label.kind.value, "evidence": label.evidence}
    except PlanktonError as exc:
        print(f"regime: Inconclusive ({exc})")
        result = {"label": "Inconclusive", "error": str(exc)}
    print(f"terminal: {traj.terminal.value} at t = {traj.times[-1]:.10g}")
    print("equilibria:")
    print("\n".join(_equilibrium_lines(p)))
    if traj.terminal in (Terminal.DOMAIN_VIOLATION, Terminal.SOLVER_FAILURE):
        status = EXIT_TERMINAL

    if cfg.method == "bpes":
        try:
            sol = solve(p, cfg.bpes)
        except ArgumentDomainError as exc:
            print(f"bpes: ArgumentDomainError ({exc})")
            result["bpes"] = {"error": str(exc)}
            status = EXIT_TERMINAL
        else:
            cmp = compare_with_reference(sol, points=cfg.output.points)
            rows = zip(cmp["t"], cmp["bpes"], cmp["reference"])
            _write(out / "bpes_timeseries.csv", "t,x,y\n" + "".join(
                f"{t:.12g},{b[0]:.12g},{b[1]:.12g}\n" for t, b, _ in rows))
            _write(out / "reference_tm.csv", "t,x,y\n" + "".join(
                f"{t:.12g},{r[0]:.12g},{r[1]:.12g}\n"
                for t, r in zip(cmp["t"], cmp["reference"])))
            _write(out / "bpes_coefficients.json", dumps(sol.to_dict()))
            summary = {k: cmp[k] for k in ("max_abs_error_x", "max_abs_error_y",
                                           "max_abs_error", "t_worst")}
            result["bpes"] = {"t_m": sol.t_m, "objective": sol.objective_value,
                              "termination": sol.diagnostics["termination"], **summary}
            print(f"bpes: t_m = {sol.t_m:.6g}, objective = {sol.objective_value:.6g}, "
                  f"termination = {sol.diagnostics['termination']}")
            print(f"bpes vs reference on [0, t_m]: max |dx| = {summary['max_abs_error_x']:.3e}, "
                  f"max |dy| = {summary['max_abs_error_y']:.3e}")
    _write(out / "result.json", dumps(result))
    return status


def cmd_stability(args) -> int:
    cfg = _base_config(args)
    report = stability_report(cfg.model, (args.x_min, args.x_max), args.samples)
    text = dumps(report)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        _write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def _grid(args) -> tuple[float, ...]:
    if args.values:
        return tuple(sorted(float(v) for v in args.values.split(",")))
    if args.start is None or args.stop is None:
        raise ValidationError("give --from/--to (with --points) or --values")
    if args.points < 1:
        raise ValidationError("--points must be >= 1")
    if args.points == 1:
        return (args.start,)
    grid = np.linspace(args.start, args.stop, args.points)
    return tuple(float(f"{v:.12g}") for v in grid)


def cmd_sweep(args) -> int:
    cfg = _base_config(args)
    if cfg.sweep is not None and args.vary is None:
        spec = replace(cfg.sweep, base=cfg.model, initial=cfg.initial) if (
            any(getattr(args, n) is not None for n in ("alpha", "lambda", "beta", "gamma", "mu",
                                                        "x0", "y0"))) else cfg.sweep
    else:
        if args.vary is None:
            raise ValidationError("--vary is required without a sweep config")
        spec = SweepSpec(base=cfg.model, initial=cfg.initial, varying=args.vary,
                         grid=_grid(args), t_end=cfg.t_end, rel_tol=cfg.rel_tol,
                         abs_tol=cfg.abs_tol)
    out = _out_dir(args, cfg)
    result = sweep(spec, workers=args.workers)
    _write(out / "sweep.csv", sweep_csv(result))
    _write(out / "sweep.json", dumps(replace(cfg, sweep=spec).to_dict()))
    print(f"{spec.varying} sweep, {len(spec.grid)} points "
          f"(mu = {spec.base.mu:g}, x0 = {spec.initial.x:g}, y0 = {spec.initial.y:g}):")
    for label, lo, hi, count in result.runs():
        span = f"{lo:.6g}" if lo == hi else f"{lo:.6g} <= {spec.varying} <= {hi:.6g}"
        print(f"  {label:<20} {span}  ({count} point{'s' if count > 1 else ''})")
    return EXIT_OK


def roots_csv(q_max: int) -> str:
    lines = ["q,v_q"]
    for q in range(1, q_max + 1):
        v = boubaker.minimal_positive_root(q)
        poly = boubaker.generate(4 * q)
        residual = abs(boubaker.eval(poly, v))
        if residual > 1e-9 * (1 + max(abs(c) for c in poly.coeffs)):
            raise PlanktonError(f"root check failed for q = {q}: |B(v)| = {residual:g}")
        lines.append(f"{q},{v:.15g}")
    return "\n".join(lines) + "\n"


def cmd_roots(args) -> int:
    if args.q_max < 1:
        raise ValidationError("--q-max must be >= 1")
    text = roots_csv(args.q_max)
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        _write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tbplankton", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate, classify and write plot data")
    _add_model_flags(sim)
    _add_run_flags(sim)
    sim.add_argument("--method", choices=("reference", "bpes"), default=None)
    sim.add_argument("--n0", type=int, default=None)
    sim.add_argument("--t-m", type=float, default=None, help="override 2 pi / sqrt(alpha gamma)")
    sim.add_argument("--quadrature-nodes", type=int, default=None)
    sim.add_argument("--points", type=int, default=None, help="resampled rows for plots")
    sim.set_defaults(func=cmd_simulate)

    st = sub.add_parser("stability", help="equilibria and stability report as JSON")
    _add_model_flags(st)
    st.add_argument("--x-min", type=float, default=0.0)
    st.add_argument("--x-max", type=float, default=1.0)
    st.add_argument("--samples", type=int, default=10_001)
    st.add_argument("--out", type=Path, default=None, help="also write the report here")
    st.set_defaults(func=cmd_stability)

    sw = sub.add_parser("sweep", help="classify a one-parameter grid")
    _add_model_flags(sw)
    _add_run_flags(sw)
    sw.add_argument("--vary", choices=SWEEPABLE, default=None)
    sw.add_argument("--from", dest="start", type=float, default=None)
    sw.add_argument("--to", dest="stop", type=float, default=None)
    sw.add_argument("--points", type=int, default=50)
    sw.add_argument("--values", default=None, help="comma-separated grid instead of --from/--to")
    sw.add_argument("--workers", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    rt = sub.add_parser("roots", help="minimal positive roots of B_4q as CSV")
    rt.add_argument("--q-max", type=int, required=True)
    rt.add_argument("--out", type=Path, default=None)
    rt.set_defaults(func=cmd_roots)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
