"""Command-line front end.

    toricsim list
    toricsim run FILE | --builtin NAME [--seed N] [--backend B] [--out PATH]
    toricsim export --builtin NAME --format {json,csv} [--out DIR]
    toricsim show FILE | --builtin NAME
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .builtins import builtin, builtin_doc, list_builtins
from .scenarios import BACKENDS, Scenario, ScenarioError, export, run


def _load(args) -> Scenario:
    if args.builtin:
        return builtin(args.builtin)
    if not args.file:
        raise ScenarioError("give a scenario file or --builtin NAME")
    return Scenario.from_json(Path(args.file).read_text())


def _summary(report) -> str:
    res = report.results
    parts = [f"{report.scenario}:"]
    if "correlation" in res:
        fit = res["correlation"]["fit"]
        parts.append(f"phi={fit['phase_pi']:+.2f}pi V={fit['visibility']:.3f}")
    if "fidelity" in res:
        parts.append(f"F={res['fidelity']['F']:.3f} witness={res['fidelity']['witness']}")
    if "overlap" in res:
        re, im = res["overlap"]
        parts.append(f"overlap={re:+.3f}{im:+.3f}i")
    parts.append("PASS" if report.passed else "FAIL")
    return " ".join(parts)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="toricsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in scenarios")

    for name in ("run", "export", "show"):
        p = sub.add_parser(name)
        p.add_argument("file", nargs="?")
        p.add_argument("--builtin")
        p.add_argument("--seed", type=int)
        p.add_argument("--backend", choices=BACKENDS)
        p.add_argument("--out", help="output file (run) or directory (export)")
        if name == "export":
            p.add_argument("--format", choices=("json", "csv"), default="json")

    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            for name in list_builtins():
                print(f"{name:28s} {builtin_doc(name).get('description', '')}")
            return 0
        if args.command == "show":
            print(json.dumps(_load(args).to_dict(), indent=2))
            return 0
        report = run(_load(args), seed=args.seed, backend=args.backend)
        if args.command == "run":
            if args.out:
                Path(args.out).write_text(report.to_json())
            print(_summary(report))
            return 0 if report.passed else 1
        out_dir = Path(args.out or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        for fname, text in export(report, args.format).items():
            (out_dir / fname).write_text(text)
            print(out_dir / fname)
        return 0
    except (ScenarioError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
