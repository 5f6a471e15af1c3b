"""Command-line front end: ``swapsim run | fringe | histogram | check``."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import FringeSummary, discrimination_table
from .checks import run_checks
from .experiment import run_experiment
from .fock import CapacityError
from .optics import DomainError
from .serialize import (
    ConfigError,
    config_from_manifest,
    load_config,
    make_manifest,
    read_summary,
    write_json,
    write_records,
    write_summary,
)

OUT_ENV = "SWAPSIM_OUT"
EXIT_CONFIG, EXIT_CAPACITY, EXIT_INPUT = 2, 3, 4


def _resolve_config(args):
    if getattr(args, "manifest", None):
        config = config_from_manifest(args.manifest)
    else:
        config = load_config(args.config, args.preset)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.mode is not None:
        changes["mode"] = args.mode
    if args.trials is not None:
        changes["trials"] = args.trials
    return config.replace(**changes) if changes else config


def cmd_run(args) -> int:
    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"swapsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"swapsim: cannot load config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or os.environ.get(OUT_ENV, "swapsim-out"))
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        result = run_experiment(config)
    except (CapacityError, DomainError) as exc:
        print(f"swapsim: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    duration = time.perf_counter() - start
    records_path = out / "records.jsonl"
    if result.records is not None:
        write_records(result.records, records_path)
    elif records_path.exists():
        records_path.unlink()
    write_summary(result.summary, out / "summary.json")
    write_json(make_manifest(config, duration, __version__), out / "manifest.json")
    s = result.summary
    print(f"{config.mode}: {config.trials if config.mode == 'montecarlo' else 'exact'} trials, "
          f"V = {s.visibility:.4f} +/- {s.visibility_err:.4f} -> {out}")
    return 0


def _load_summary(path) -> FringeSummary | None:
    try:
        return read_summary(path)
    except (OSError, ValueError, KeyError) as exc:
        print(f"swapsim: cannot read summary {path}: {exc}", file=sys.stderr)
        return None


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def fringe_table(summary: FringeSummary) -> str:
    """CSV of the two conditioned fringes and the flat rate, one row per scheduled phase.

    Subset rates are the share of each Victor subset's coincidences that hit
    D1*; the unconditioned rate is D1* clicks per trial.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["phi", "unconditioned_rate", "unconditioned_err",
                "d1_subset_rate", "d1_subset_err", "d2_subset_rate", "d2_subset_err"])
    unc, unc_err = summary.rate("D1*"), summary.rate_err("D1*")
    d1, d1_err = summary.subset_rate("PsiMinus")
    d2, d2_err = summary.subset_rate("PsiPlus")
    for row in zip(summary.phases, unc, unc_err, d1, d1_err, d2, d2_err):
        w.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


def histogram_table(summary: FringeSummary) -> str | None:
    table = summary.histogram or discrimination_table(summary)
    if table is None:
        return None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = table["columns"]
    w.writerow(["eve_outcome"] + cols + [f"{c}_fraction" for c in cols] + ["row_total"])
    for name, counts, fracs in zip(table["rows"], table["counts"], table["fractions"]):
        w.writerow([name] + [repr(float(c)) for c in counts] + [repr(float(f)) for f in fracs] + [repr(float(sum(counts)))])
    return buf.getvalue()


def cmd_fringe(args) -> int:
    summary = _load_summary(args.summary)
    if summary is None:
        return EXIT_INPUT
    _emit(fringe_table(summary), args.out)
    return 0


def cmd_histogram(args) -> int:
    summary = _load_summary(args.summary)
    if summary is None:
        return EXIT_INPUT
    text = histogram_table(summary)
    if text is None:
        print("swapsim: summary has no phi = 0 point", file=sys.stderr)
        return EXIT_INPUT
    _emit(text, args.out)
    return 0


def cmd_check(args) -> int:
    try:
        config = _resolve_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"swapsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    results = run_checks(config)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def _config_flags(p):
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--preset", choices=["paper"], help="built-in parameter set")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["analytic", "montecarlo"])
    p.add_argument("--trials", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swapsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate and write records, summary and manifest")
    _config_flags(run)
    run.add_argument("--manifest", help="rerun the configuration echoed in a manifest")
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./swapsim-out)")
    run.set_defaults(func=cmd_run)

    fringe = sub.add_parser("fringe", help="fringe table (CSV) from a summary")
    fringe.add_argument("summary")
    fringe.add_argument("--out", help="write CSV here instead of stdout")
    fringe.set_defaults(func=cmd_fringe)

    hist = sub.add_parser("histogram", help="Psi-/Psi+ discrimination table at phi = 0")
    hist.add_argument("summary")
    hist.add_argument("--out", help="write CSV here instead of stdout")
    hist.set_defaults(func=cmd_histogram)

    check = sub.add_parser("check", help="run the invariant suite")
    _config_flags(check)
    check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
