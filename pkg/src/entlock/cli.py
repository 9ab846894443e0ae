"""Command line front end.

    entlock list
    entlock run --experiment lock-en-basis --d 4 --seed 42 --out report.json

Exit codes: 0 success, 1 internal error, 2 reference mismatch beyond
tolerance, 3 unknown experiment, 4 invalid parameters.
"""

from __future__ import annotations

import argparse
import json
import sys

from .densop import DimensionCapError, PositivityError
from .experiments import REGISTRY, list_experiments, run_experiment

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISMATCH = 2
EXIT_UNKNOWN = 3
EXIT_BAD_PARAMS = 4

_FLAG_PARAMS = ("d", "l", "n", "alpha", "eps")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="entlock",
        description="entanglement-locking state constructions, measures and "
        "reproducible desk-scale experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list the experiment registry")

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--experiment", required=True, help="registry name")
    run.add_argument("--d", type=int, default=None)
    run.add_argument("--l", type=int, default=None)
    run.add_argument("--n", type=int, default=None)
    run.add_argument("--alpha", type=float, default=None)
    run.add_argument("--eps", type=float, default=None)
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--out", default=None, help="output path (default stdout)")
    run.add_argument("--format", choices=("json", "csv"), default="json")
    run.add_argument("--tol-override", type=float, default=None,
                     help="replace every per-row tolerance")
    run.add_argument("--config", default=None,
                     help="JSON file with extra parameters; flags win")
    return parser


def _collect_params(args):
    params = {}
    if args.config:
        with open(args.config) as handle:
            loaded = json.load(handle)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        params.update(loaded)
    for key in _FLAG_PARAMS:
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    return params


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.command == "list":
        for name, summary in list_experiments():
            print(f"{name}: {summary}")
        return EXIT_OK

    if args.experiment not in REGISTRY:
        print(f"unknown experiment {args.experiment!r}; "
              f"known: {', '.join(sorted(REGISTRY))}", file=sys.stderr)
        return EXIT_UNKNOWN

    try:
        params = _collect_params(args)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"bad configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS

    try:
        report = run_experiment(args.experiment, params, args.seed,
                                args.tol_override)
    except (ValueError, KeyError, TypeError, PositivityError,
            DimensionCapError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR

    text = report.to_json_text() if args.format == "json" else report.to_csv_text()
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)

    failing = [r for r in report.rows if not r.passed]
    status = "PASS" if not failing else "MISMATCH"
    print(
        f"{report.experiment}: {status} ({len(report.rows)} rows, "
        f"seed {report.seed}, wall {report.wall_time_s:.2f} s)",
        file=sys.stderr,
    )
    for row in failing:
        print(
            f"  {row.quantity}: value {row.value!r} vs reference "
            f"{row.reference!r} (|err| {row.abs_err:.3e} > tol {row.tol:.3e})",
            file=sys.stderr,
        )
    return EXIT_OK if not failing else EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
