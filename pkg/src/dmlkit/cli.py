"""Command-line driver: run scenarios, write artifacts, check bounds.

    dmlkit epistemic --seed 42 --out-dir out
    dmlkit all --check
    dmlkit deontic --override epochs=0
    dmlkit selftest

Exit status is 2 for a bad configuration, 1 when ``--check`` finds a failed
bound (or ``selftest`` a failed suite) and 0 otherwise.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import report, selftest
from .pipeline import DEFAULTS, SCENARIOS, ConfigError, execute, resolve_all

CHOICES = SCENARIOS + ("all", "selftest")
OUT_ENV = "DMLKIT_OUT_DIR"
DEFAULT_OUT = "dmlkit_out"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dmlkit", description="Differentiable modal logic scenario runner.")
    p.add_argument("scenario_pos", nargs="?", metavar="SCENARIO", help=f"one of {', '.join(CHOICES)}")
    p.add_argument("--scenario", dest="scenario_opt", help="same as the positional SCENARIO")
    p.add_argument("--seed", type=int, default=42, help="random seed (default 42)")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE", help="hyperparameter override")
    p.add_argument("--check", action="store_true", help="exit 1 if any acceptance bound fails")
    p.add_argument("--list-overrides", action="store_true", help="print accepted override keys and exit")
    return p


def _scenario(args, parser) -> str:
    a, b = args.scenario_pos, args.scenario_opt
    if a and b and a != b:
        raise ConfigError(f"conflicting scenarios {a!r} and {b!r}")
    name = a or b
    if name is None:
        raise ConfigError("no scenario given")
    if name not in CHOICES:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(CHOICES)}")
    return name


def _out_dir(args) -> Path:
    return Path(args.out_dir or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _write_tables(folder: Path, tables: dict, fmt: str) -> list[str]:
    written = []
    for fname, (header, rows) in tables.items():
        if fmt == "csv":
            report.write_csv(folder / fname, header, rows)
            written.append(fname)
        else:
            name = fname.rsplit(".", 1)[0] + ".json"
            report.write_json(folder / name, {"columns": list(header), "records": report.table_records(header, rows)})
            written.append(name)
    return written


def run_selftest(out=None) -> int:
    out = out or sys.stdout
    failed = 0
    for s in selftest.run_all():
        print(f"{'PASS' if s.passed else 'FAIL'} {s.name} ({s.checks} checks)", file=out)
        for msg in s.failures:
            print(f"    {msg}", file=out)
        failed += not s.passed
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_overrides:
        for s, d in DEFAULTS.items():
            print(f"{s}: " + ", ".join(f"{k}={v}" for k, v in d.items()))
        return 0
    try:
        name = _scenario(args, parser)
        if name == "selftest":
            return run_selftest()
        chosen = list(SCENARIOS) if name == "all" else [name]
        configs = resolve_all(chosen, args.override)
    except ConfigError as e:
        print(f"dmlkit: error: {e}", file=sys.stderr)
        return 2

    out = _out_dir(args)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"dmlkit: error: cannot create {out}: {e}", file=sys.stderr)
        return 2

    manifest = {
        "seed": args.seed,
        "format": args.format,
        "config": configs,
        "config_hash": report.config_hash({"seed": args.seed, "format": args.format, "config": configs}),
        "scenarios": {},
    }
    all_ok = True
    for s in chosen:
        try:
            outcome = execute(s, args.seed, configs[s])
        except (ValueError, FloatingPointError) as e:
            print(f"dmlkit: error: {s}: {e}", file=sys.stderr)
            return 2
        folder = out / s
        files = _write_tables(folder, outcome.tables, args.format)
        report.write_json(folder / "metrics.json", {"scenario": s, "seed": args.seed, "metrics": outcome.metrics})
        files.append("metrics.json")
        if s == "orchestrate":
            m = outcome.metrics
            report.write_json(
                folder / "final_assignment.json",
                {
                    "winner": m["winner"],
                    "winner_probability": m["winner_probability"],
                    "assignment": list(outcome.result.final),
                    "boundary": m["boundary"],
                },
            )
            files.append("final_assignment.json")
        manifest["scenarios"][s] = {
            "files": [f"{s}/{f}" for f in files],
            "metrics": outcome.metrics,
            "checks": [{"name": n, "passed": ok} for n, ok in outcome.checks],
        }
        for n, ok in outcome.checks:
            print(f"{'PASS' if ok else 'FAIL'} {s}: {n}")
        all_ok &= outcome.passed
    report.write_json(out / "manifest.json", manifest)
    print(f"artifacts written to {out}")
    return 1 if args.check and not all_ok else 0


if __name__ == "__main__":
    sys.exit(main())
