"""Command-line interface.

Exit codes: 0 success, 2 calibration record inconsistent with the error
model (clamped solve), 64 usage error, 65 malformed input data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from .analysis import analyze
from .calibration import BoundaryFlag, CalibrationRecord, estimate_error_rates
from .io import (
    DataFormatError,
    calibration_from_name_files,
    format_summary,
    load_calibration,
    load_experiment_config,
    parse_incidence_csv,
    write_report_csv,
    write_report_json,
    write_summary_csv,
)
from .simulator import ExperimentConfig, run_experiment
from .survey import SurveyValidationError

EXIT_OK = 0
EXIT_CLAMPED = 2
EXIT_USAGE = 64
EXIT_DATA = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="misid-richness",
                description="Species richness estimation corrected for misidentification error.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("calibrate", help="estimate error rates from a known-species subplot")
    c.add_argument("--s-sub", type=int)
    c.add_argument("--s-sub-e", type=int)
    c.add_argument("--f-sub0", type=int)
    c.add_argument("--truth-list", type=Path, help="file of true subplot species, one per line")
    c.add_argument("--recorded-list", type=Path, help="file of species the observer recorded")
    c.add_argument("--out", type=Path, help="write the estimate as JSON")

    e = sub.add_parser("estimate", help="observed and adjusted richness for a survey")
    e.add_argument("--data", type=Path, required=True, help="incidence CSV")
    e.add_argument("--e-bar", type=float)
    e.add_argument("--r", type=float)
    e.add_argument("--calibration", type=Path, help="calibration JSON file")
    e.add_argument("--bootstrap", type=int, default=200, help="bootstrap trials (default 200)")
    e.add_argument("--seed", type=_seed, default=0)
    e.add_argument("--out", type=Path, help="report file (.csv or .json)")

    s = sub.add_parser("simulate", help="run the misidentification simulation study")
    s.add_argument("--config", type=Path, help="experiment config (.toml or .json)")
    s.add_argument("--model", choices=("uniform01", "mixture"))
    s.add_argument("--t", type=int)
    s.add_argument("--e-bar-grid", type=lambda x: [float(v) for v in x.split(",")])
    s.add_argument("--r", type=float)
    s.add_argument("--replicates", type=int)
    s.add_argument("--bootstrap", type=int)
    s.add_argument("--seed", type=_seed)
    s.add_argument("--threads", type=int, help="worker processes (default: all cores)")
    s.add_argument("--out", type=Path, help="summary CSV (default: standard output only)")
    return p


def cmd_calibrate(args) -> int:
    counts = (args.s_sub, args.s_sub_e, args.f_sub0)
    lists = (args.truth_list, args.recorded_list)
    if any(v is not None for v in counts) and any(v is not None for v in lists):
        raise UsageError("give either --s-sub/--s-sub-e/--f-sub0 or --truth-list/--recorded-list")
    if all(v is not None for v in lists):
        rec = calibration_from_name_files(*lists)
    elif all(v is not None for v in counts):
        try:
            rec = CalibrationRecord(*counts)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    else:
        raise UsageError("need --s-sub, --s-sub-e and --f-sub0, or --truth-list and --recorded-list")

    est = estimate_error_rates(rec)
    print(f"S_sub={rec.S_sub} S_sub_e={rec.S_sub_e} f_sub_0={rec.f_sub_0}")
    print(f"e_bar={est.e_bar:.3f} r={est.r:.3f}")
    print(f"residual={est.residual:.3g} flag={est.boundary_flag.value}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({
                "S_sub": rec.S_sub, "S_sub_e": rec.S_sub_e, "f_sub_0": rec.f_sub_0,
                "e_bar": est.e_bar, "r": est.r, "residual": est.residual,
                "boundary_flag": est.boundary_flag.value,
            }, fh, indent=2)
            fh.write("\n")
    return EXIT_CLAMPED if est.boundary_flag is BoundaryFlag.NO_SOLUTION_CLAMPED else EXIT_OK


def cmd_estimate(args) -> int:
    direct = (args.e_bar, args.r)
    if args.calibration is not None and any(v is not None for v in direct):
        raise UsageError("--calibration and --e-bar/--r are mutually exclusive")
    if any(v is not None for v in direct) and not all(v is not None for v in direct):
        raise UsageError("--e-bar and --r must be given together")
    if args.bootstrap < 2:
        raise UsageError("--bootstrap must be at least 2")
    if args.out is not None and args.out.suffix not in (".csv", ".json"):
        raise UsageError("--out must end in .csv or .json")

    m = parse_incidence_csv(args.data)
    if m.T < 2:
        raise DataFormatError(f"{args.data}: need at least 2 sampling units")
    rec = load_calibration(args.calibration) if args.calibration else None
    rates = direct if args.e_bar is not None else None
    try:
        report = analyze(m, calibration=rec, rates=rates, trials=args.bootstrap, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(report.format_table())
    if args.out is not None:
        if args.out.suffix == ".csv":
            write_report_csv(report, args.out)
        else:
            write_report_json(report, args.out)
    if report.boundary_flag == BoundaryFlag.NO_SOLUTION_CLAMPED.value:
        return EXIT_CLAMPED
    return EXIT_OK


def _simulation_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = load_experiment_config(args.config).to_dict()
    else:
        cfg = ExperimentConfig().to_dict()
    overrides = {
        "T": args.t, "e_bar_grid": args.e_bar_grid, "r": args.r,
        "replicates": args.replicates, "bootstrap_trials": args.bootstrap, "seed": args.seed,
    }
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    if args.model is not None:
        cfg["detection"] = {"kind": args.model}
    try:
        return ExperimentConfig.from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid simulation settings: {exc}") from exc


def cmd_simulate(args) -> int:
    cfg = _simulation_config(args)
    if args.threads is not None and args.threads < 1:
        raise UsageError("--threads must be >= 1")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        summary = run_experiment(cfg, threads=args.threads)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(format_summary(summary))
    if args.out is not None:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_summary_csv(summary, fh)
    return EXIT_OK


COMMANDS = {"calibrate": cmd_calibrate, "estimate": cmd_estimate, "simulate": cmd_simulate}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"misid-richness {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, SurveyValidationError) as exc:
        print(f"misid-richness {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"misid-richness {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
