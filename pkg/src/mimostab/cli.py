"""Command-line interface.

Exit codes: 0 success, 1 analysis error, 2 parse or validation error,
3 corpus mismatch in ``paper-suite``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .commands import AnalysisOptions, run_command
from .config import get_tolerances, use_tolerances
from .exceptions import MimoStabError, ParseError, ValidationError
from .reporting import dump_json, tolerances_to_dict
from .suite import run_suite
from .systems import parse_system

EXIT_ANALYSIS = 1
EXIT_PARSE = 2
EXIT_MISMATCH = 3

_ONE = ("stability", "nyquist", "gnc", "margins", "bounds", "passivity")
_TWO = ("smallgain", "mixed")


def _param(text: str):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"parameter {name!r} needs a real value") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-root", type=float, help="root-matching tolerance for GCDs")
    common.add_argument("--tol-marginal", type=float, help="half-width of the imaginary-axis band")
    common.add_argument("--grid-points", type=int, default=200, help="base points per frequency half-axis")
    common.add_argument("--omega-max", type=float, help="largest grid frequency (rad/s)")
    common.add_argument("--json", metavar="PATH", help="also write the report as JSON")
    common.add_argument("--curves", metavar="DIR", help="write curve CSV files to this directory")
    common.add_argument("--param", action="append", type=_param, default=[], metavar="NAME=VALUE",
                        help="override a system parameter (repeatable)")

    parser = argparse.ArgumentParser(prog="mimostab", description="MIMO LTI feedback stability analysis")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _ONE:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("system", help="system description file (JSON)")
    for name in _TWO:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("system", help="first system file")
        p.add_argument("other", help="second system file")
    sub.add_parser("paper-suite", parents=[common], help="run the built-in corpus")
    return parser


def _print_report(rep: dict, out) -> None:
    name = rep["system"] if isinstance(rep["system"], str) else " / ".join(rep["system"])
    print(f"{rep['command']}: {name}", file=out)
    v = rep.get("verdict")
    if v:
        print(f"  verdict: {v['status']} ({v['method']})", file=out)
        for w in v["witnesses"]:
            print(f"    witness: {w['re']:+.10g} {w['im']:+.10g}j  (x{w['multiplicity']})", file=out)
        for note in v["notes"]:
            print(f"    {note}", file=out)
    for key in ("cross_check", "margins", "bounds", "passivity", "small_gain", "common_c",
                "winding", "windings", "merged_curves", "curves"):
        if key in rep:
            print(f"  {key}: {rep[key]}", file=out)


def _tolerance_overrides(args) -> dict:
    out = {}
    if args.tol_root is not None:
        out["root"] = args.tol_root
    if args.tol_marginal is not None:
        out["marginal"] = args.tol_marginal
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = sys.stdout
    opts = AnalysisOptions(
        grid_points=args.grid_points,
        omega_max=args.omega_max,
        curves_dir=Path(args.curves) if args.curves else None,
    )
    overrides = dict(args.param)
    try:
        with use_tolerances(**_tolerance_overrides(args)):
            if args.command == "paper-suite":
                return _paper_suite(args, opts, out)
            files = [args.system] + ([args.other] if args.command in _TWO else [])
            systems = [parse_system(f, overrides=overrides or None) for f in files]
            rep = run_command(args.command, systems, opts)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except MimoStabError as exc:
        print(f"analysis error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    _print_report(rep, out)
    if args.json:
        dump_json(rep, args.json)
    return 0


def _paper_suite(args, opts, out) -> int:
    result = run_suite(opts)
    result["tolerances"] = tolerances_to_dict(get_tolerances())
    for case in result["cases"]:
        mark = "ok  " if case["passed"] else "FAIL"
        print(f"{mark} {case['id']}", file=out)
        for p in case["problems"]:
            print(f"       {p}", file=out)
    n_ok = sum(c["passed"] for c in result["cases"])
    print(f"{n_ok}/{len(result['cases'])} corpus cases match", file=out)
    if args.json:
        dump_json(result, args.json)
    return 0 if result["passed"] else EXIT_MISMATCH


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
