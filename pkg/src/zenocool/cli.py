"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 oracle-check failure,
3 runtime/integration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .evolution import IntegrationError
from .presets import PRESETS, preset_sweeps
from .protocol import ExtinctionError, zeno_spectrum
from .sweeps import ConfigError, classify_regions, load_config, oracle_check, run_config, write_results

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ORACLE = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zenocool",
        description="Measurement-based subspace cooling of qudit spin systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a JSON sweep config")
    run.add_argument("--config", required=True, help="path to the JSON config")
    run.add_argument("--out", required=True, help="output directory for CSV + manifest")
    run.add_argument("--workers", type=int, default=1)

    pre = sub.add_parser("preset", help="execute a pinned figure grid")
    pre.add_argument("id", help=f"one of {sorted(PRESETS)}")
    pre.add_argument("--out", required=True)
    pre.add_argument("--workers", type=int, default=1)
    pre.add_argument("--include-d5", action="store_true",
                     help="fig4 only: add the d=5 panel")

    sub.add_parser("oracle-check", help="engine vs closed-form agreement grids")

    spec = sub.add_parser("spectrum", help="dump the round-map spectrum as JSON")
    spec.add_argument("--config", required=True)

    cls = sub.add_parser("classify", help="imperfect refrigerating regions from a results CSV")
    cls.add_argument("--in", dest="input", required=True)
    cls.add_argument("--threshold", type=float, default=0.96)
    return parser


def _cmd_run(args) -> int:
    csv_path, manifest_path = run_config(args.config, args.out, workers=args.workers)
    print(f"wrote {csv_path} and {manifest_path}")
    return EXIT_OK


def _cmd_preset(args) -> int:
    sweeps = preset_sweeps(args.id, include_d5=args.include_d5)
    csv_path, manifest_path = write_results(sweeps, args.out, workers=args.workers)
    print(f"wrote {csv_path} and {manifest_path}")
    return EXIT_OK


def _cmd_oracle_check() -> int:
    report = oracle_check()
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_ORACLE


def _cmd_spectrum(args) -> int:
    spec = load_config(args.config)
    if spec.grid() != [(None, None, None, None)]:
        raise ConfigError("spectrum takes a single-point config (no axes)")
    result = zeno_spectrum(spec.base)
    doc = {
        "eigenvalues": [[v.real, v.imag] for v in result.eigenvalues],
        "dominant_right": [[v.real, v.imag] for v in result.dominant_right],
        "dominant_left": [[v.real, v.imag] for v in result.dominant_left],
        "dominant_is_simple": result.dominant_is_simple,
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def _cmd_classify(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise ConfigError(f"no such file: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        summaries = classify_regions(csv.DictReader(fh), threshold=args.threshold)
    print(json.dumps({"threshold": args.threshold,
                      "groups": [s.to_dict() for s in summaries]}, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            code = _cmd_run(args)
        elif args.command == "preset":
            code = _cmd_preset(args)
        elif args.command == "oracle-check":
            code = _cmd_oracle_check()
        elif args.command == "spectrum":
            code = _cmd_spectrum(args)
        else:
            code = _cmd_classify(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        code = EXIT_VALIDATION
    except ValueError as err:
        print(f"validation error: {err}", file=sys.stderr)
        code = EXIT_VALIDATION
    except (IntegrationError, ExtinctionError, RuntimeError) as err:
        print(f"runtime error: {err}", file=sys.stderr)
        code = EXIT_RUNTIME
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
