"""Command-line entry point: ``jacobi-frames verify <id|all>`` and ``jacobi-frames list``."""

from __future__ import annotations

import argparse
import json
import sys

from .harness import CURVATURE_CHOICES, FAILURE_NOTE, ScenarioError, registry, run_scenario, write_dump

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jacobi-frames",
        description="Exact verification scenarios for structure Jacobi operators of real hypersurfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", help="run one scenario, or all of them")
    verify.add_argument("scenario", help="scenario id, or 'all'")
    verify.add_argument("--json", action="store_true", help="print JSON reports")
    verify.add_argument("--dump", metavar="DIR", help="write intermediate forms and values under DIR")
    verify.add_argument(
        "--c", dest="curvature", choices=list(CURVATURE_CHOICES), default="symbolic",
        help="curvature constant: keep symbolic or pin to +1 / -1",
    )
    verify.add_argument("--no-timing", action="store_true", help="report 0 ms for every check")
    sub.add_parser("list", help="list registered scenarios")
    return parser


def _listing(reg) -> str:
    width = max(len(k) for k in reg)
    return "\n".join(f"  {sid.ljust(width)}  {sc.paper_anchor}" for sid, sc in reg.items())


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        reg = registry()
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "list":
        print(_listing(reg))
        return EXIT_PASS

    if args.scenario == "all":
        selected = list(reg.values())
    elif args.scenario in reg:
        selected = [reg[args.scenario]]
    else:
        print(f"error: unknown scenario {args.scenario!r}; registered scenarios:", file=sys.stderr)
        print(_listing(reg), file=sys.stderr)
        return EXIT_USAGE

    c = CURVATURE_CHOICES[args.curvature]
    reports = [run_scenario(sc, c, timing=not args.no_timing) for sc in selected]
    if args.dump:
        for r in reports:
            write_dump(r, args.dump)

    if args.json:
        payload = [r.to_dict() for r in reports]
        print(json.dumps(payload if args.scenario == "all" else payload[0], indent=2))
    else:
        for r in reports:
            print(r.to_text())
        passed = sum(r.status == "pass" for r in reports)
        print(f"{passed}/{len(reports)} scenarios passed (c = {args.curvature})")
        if passed != len(reports):
            print(FAILURE_NOTE)
    return EXIT_PASS if all(r.status == "pass" for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
