"""Command-line interface: ``descm validate-exact | solve | random-study``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from .convergence import (absolute_errors, converge, csv_text, exact_reference,
                          random_study, record_rows, run_to_dict)
from .eigensolve import EigenSolveError
from .potential import PotentialError, load_potential

log = logging.getLogger("descm")

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return value


def _int_at_least(lo):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}: {value}")
        return value
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="descm",
        description="Double-exponential Sinc-collocation eigenvalues for rational potentials.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-exact", help="check the four closed-form test spectra")
    p.add_argument("--g", type=_positive_float, default=1.0)
    p.add_argument("--tol", type=_positive_float, default=1e-9)
    p.add_argument("--nmax", type=_int_at_least(2), default=200)
    p.add_argument("--out", help="directory for CSV, gnuplot script and PNG of the error curves")

    p = sub.add_parser("solve", help="converge the lowest levels of one potential")
    p.add_argument("--potential", required=True, help="JSON file or inline JSON object")
    p.add_argument("--map", choices=("auto", "plain", "single", "multi"), default="auto")
    p.add_argument("--tol", type=_positive_float, default=1e-10)
    p.add_argument("--nmax", type=_int_at_least(2), default=200)
    p.add_argument("--levels", type=_int_at_least(1), default=4)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (default stdout); a PNG is rendered next to it")

    p = sub.add_parser("random-study", help="convergence traces for random potentials")
    p.add_argument("--m", type=_int_at_least(1), required=True)
    p.add_argument("--l", type=_int_at_least(1), required=True)
    p.add_argument("--count", type=_int_at_least(1), required=True)
    p.add_argument("--seed", type=_int_at_least(0), required=True)
    p.add_argument("--tol", type=_positive_float, default=1e-10)
    p.add_argument("--nmax", type=_int_at_least(2), default=200)
    p.add_argument("--levels", type=_int_at_least(1), default=4)
    p.add_argument("--jobs", type=_int_at_least(1), default=1)
    p.add_argument("--out", default="study", help="output directory (created if missing)")
    return parser


def _configure_logging():
    name = os.environ.get("DESCM_LOG", "error").strip().lower()
    if name not in LOG_LEVELS:
        raise UsageError(f"DESCM_LOG must be one of {sorted(LOG_LEVELS)}, got {name!r}")
    logging.basicConfig(level=LOG_LEVELS[name], format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def _outdir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from None
    return out


def cmd_validate_exact(args) -> int:
    # converge a decade below the requested tolerance so that eps_n is a safe
    # proxy for the true error, then judge against the exact energy
    inner = args.tol / 10
    header = f"{'case':>4} {'lambda(g)':>22} {'level':>5} {'exact E':>22} {'computed E':>22} " \
             f"{'abs error':>10} {'rel error':>10} {'N':>4}  status"
    print(f"# g = {args.g:g}, tol = {args.tol:g}")
    print(header)
    failures = 0
    rows, traces = [], {}
    for case in (1, 2, 3, 4):
        pot, level, exact = exact_reference(case, args.g)
        lam = pot.numerator.coefficients[2]
        run = converge(pot, "auto", tol=inner, N_max=args.nmax, levels=4)
        computed = run.spectrum[level]
        err = abs(computed - exact)
        rel = err / abs(exact) if exact != 0 else float("nan")
        ok = err <= args.tol
        failures += not ok
        print(f"{case:>4} {lam:>22.17g} {level:>5} {exact:>22.17g} {computed:>22.17g} "
              f"{err:>10.3e} {rel:>10.3e} {run.spectrum.N:>4}  {'pass' if ok else 'FAIL'}")
        rows.extend(record_rows(run.records, case))
        pts = absolute_errors(run, level, exact)
        traces[f"case {case}, n = {level}"] = ([n for n, _ in pts], [e for _, e in pts], exact)
    if args.out:
        from .plotting import plot_exact_errors, write_gnuplot_script

        out = _outdir(args.out)
        (out / "exact.csv").write_text(csv_text(rows))
        write_gnuplot_script("exact.csv", out / "exact.gp", title=f"exact cases, g = {args.g:g}")
        plot_exact_errors(traces, out / "exact.png")
    return EXIT_OK if failures == 0 else EXIT_NUMERIC


def cmd_solve(args) -> int:
    pot = load_potential(args.potential)
    run = converge(pot, args.map, tol=args.tol, N_max=args.nmax, levels=args.levels)
    if args.format == "json":
        text = json.dumps(run_to_dict(run, pot), indent=2) + "\n"
    else:
        text = csv_text(record_rows(run.records))
    if args.out:
        from .plotting import plot_convergence

        path = Path(args.out)
        try:
            path.write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc}") from None
        plot_convergence(run.records, path.with_suffix(".png"), title=f"map: {run.cmap.kind}")
    else:
        sys.stdout.write(text)
    if not run.converged:
        log.error("tolerance %g not met by N = %d", args.tol, args.nmax)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_random_study(args) -> int:
    from .plotting import plot_study, write_gnuplot_script

    out = _outdir(args.out)
    report = random_study(args.m, args.l, args.count, args.seed, tol=args.tol,
                          N_max=args.nmax, levels=args.levels, jobs=args.jobs)
    stem = f"study_m{args.m}_l{args.l}_seed{args.seed}"
    try:
        (out / f"{stem}.json").write_text(report.to_json() + "\n")
        (out / f"{stem}.csv").write_text(csv_text(report.csv_rows()))
    except OSError as exc:
        raise UsageError(f"cannot write study output in {out}: {exc}") from None
    write_gnuplot_script(f"{stem}.csv", out / f"{stem}.gp",
                         title=f"m = {args.m}, l = {args.l}, seed = {args.seed}")
    plot_study(report, out / f"{stem}.png")
    missed = report.non_converged(0)
    print(f"{report.count - len(missed)}/{report.count} potentials reached eps_0 <= {args.tol:g} "
          f"by N = {args.nmax}")
    for e in missed:
        print(f"  not converged: id {e.potential_id}, map {e.map['kind']}, final N {e.final_N}, "
              f"E_0 {e.final_eigenvalues[0]:.6g}"
              + (f", reason: {e.map['fallback_reason']}" if e.map["fallback_reason"] else ""))
    print(f"wrote {out / stem}.{{json,csv,gp,png}}")
    return EXIT_OK


COMMANDS = {"validate-exact": cmd_validate_exact, "solve": cmd_solve,
            "random-study": cmd_random_study}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        _configure_logging()
        return COMMANDS[args.command](args)
    except (UsageError, PotentialError) as exc:
        print(f"descm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (EigenSolveError, ArithmeticError) as exc:
        print(f"descm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"descm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
