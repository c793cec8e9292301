"""Command-line entry point: ``ris-outage run|validate|presets``.

Exit status is 0 on success, 1 for invalid input (config syntax, scenario
or sweep validation) and 2 for failures while running. A closed-form vs.
Monte Carlo divergence is reported but never changes the status.
"""

import argparse
import sys
from pathlib import Path

from . import kernels
from .model import ConfigParseError, ValidationError, load_scenario
from .montecarlo import MIN_TRIALS
from .sweep import (
    AXES,
    AXIS_LABELS,
    METHODS,
    SweepSpec,
    agreement_report,
    emit_csv,
    emit_gnuplot,
    list_presets,
    load_preset,
    parse_grid,
    parse_methods,
    run_preset,
    run_sweep,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


class InputError(Exception):
    pass


def _err(msg):
    print(f"ris-outage: error: {msg}", file=sys.stderr)


def _load(path):
    try:
        return load_scenario(path)
    except FileNotFoundError:
        raise InputError(f"scenario file not found: {path}") from None


def _check_trials(trials, methods):
    if "monte_carlo" in methods and trials < MIN_TRIALS:
        raise InputError(f"--trials must be at least {MIN_TRIALS}")


def cmd_validate(args):
    scn = _load(args.scenario)
    print(f"{args.scenario}: ok")
    print(f"  surfaces x blocks   {scn.n_ris} x {scn.blocks_per_ris} ({scn.n_paths} candidate paths)")
    print(f"  elements per block  {scn.m_prime}")
    print(f"  gamma_T             {scn.gamma_t:.6g}")
    print(f"  Omega               {scn.omega:.6g}")
    return EXIT_OK


def cmd_run(args):
    scn = _load(args.scenario)
    try:
        methods = parse_methods(args.methods)
        grid = parse_grid(args.grid)
        _check_trials(args.trials, methods)
        spec = SweepSpec(
            axis=args.axis,
            grid=grid,
            fixed=scn,
            methods=methods,
            trials=args.trials,
            seed=args.seed,
            crn=args.crn,
            workers=args.workers,
        )
        spec.point_scenarios()
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{Path(args.scenario).stem}_{args.axis}"
    rows = run_sweep(spec)
    csv_path = emit_csv(rows, out / f"{stem}.csv")
    emit_gnuplot({Path(args.scenario).stem: csv_path.name}, out / f"{stem}.gp", title=stem, xlabel=AXIS_LABELS[args.axis])
    print(f"wrote {csv_path}")
    if set(methods) == set(METHODS):
        rep = agreement_report(rows)
        text = rep.render(title=stem)
        (out / f"{stem}_agreement.txt").write_text(text, encoding="utf-8")
        print(f"closed form vs. Monte Carlo: {rep.verdict}")
    return EXIT_OK


def cmd_presets(args):
    if args.action == "list":
        for name in list_presets():
            p = load_preset(name)
            print(f"{name:8s} {p.axis:16s} {len(p.series) or 1} series  {p.title}")
        return EXIT_OK
    if not args.name:
        raise InputError("presets run needs a preset name")
    try:
        preset = load_preset(args.name)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from None
    trials = preset.trials if args.trials is None else args.trials
    _check_trials(trials, preset.methods)
    out = Path(args.out)
    results = run_preset(
        preset,
        out,
        trials=args.trials,
        seed=args.seed,
        workers=args.workers,
        log=lambda m: print(m, file=sys.stderr),
    )
    for label, rows in results.items():
        if all(r.outage_cf is not None and r.outage_mc is not None for r in rows):
            print(f"{label}: closed form vs. Monte Carlo {agreement_report(rows).verdict}")
    print(f"wrote {preset.name} outputs to {out}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="ris-outage", description="Outage probability of RIS-assisted paths.")
    ap.add_argument("--backend-info", action="store_true", help="print the active trial kernel and exit")
    sub = ap.add_subparsers(dest="command")

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("--scenario", required=True)
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="sweep one parameter of a scenario")
    r.add_argument("--scenario", required=True)
    r.add_argument("--axis", required=True, choices=AXES)
    r.add_argument("--grid", required=True, help="comma-separated values; a..b expands integer ranges")
    r.add_argument("--methods", default="cf,mc")
    r.add_argument("--trials", type=int, default=100_000)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--crn", action="store_true", help="reuse the same random streams at every grid point")
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--out", default=".")
    r.set_defaults(func=cmd_run)

    p = sub.add_parser("presets", help="list or run the shipped figure presets")
    p.add_argument("action", choices=("list", "run"))
    p.add_argument("name", nargs="?")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_presets)
    return ap


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are input errors here
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.backend_info:
        print(kernels.BACKEND)
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_INVALID
    try:
        return args.func(args)
    except ConfigParseError as exc:
        _err(str(exc))
        return EXIT_INVALID
    except ValidationError as exc:
        _err("invalid scenario")
        for issue in exc.issues:
            print(f"  {issue}", file=sys.stderr)
        return EXIT_INVALID
    except InputError as exc:
        _err(str(exc))
        return EXIT_INVALID
    except (OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
