"""Command-line front door.

    qpos run <scenario.json> -o <report.json> [--tolerance T] [--grid-pitch P]
    qpos suite <name> [--seed N] [-o report.json]
    qpos eval <op> <inline-json>

Exit codes: 0 success (no expectation mismatch / no suite failure), 1 on
expectation mismatch or suite failures, 2 on schema, argument, or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from qpos.scenario import OPERATIONS, ScenarioError, report_to_json, run_scenario_doc, validate_report
from qpos.suites import SUITES, run_suite_checks


def _cmd_run(args) -> int:
    path = Path(args.scenario)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot load scenario: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_scenario_doc(doc, path.parent,
                                  tolerance_override=args.tolerance,
                                  pitch_override=args.grid_pitch)
        validate_report(report)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report_to_json(report)
    if args.output:
        try:
            Path(args.output).write_text(text + "\n")
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return 2
    else:
        print(text)
    mism = report["summary"]["expectation_mismatches"]
    if mism:
        print(f"{mism} expectation mismatch(es)", file=sys.stderr)
        return 1
    return 0


def _cmd_suite(args) -> int:
    name = args.name
    if name != "all" and name not in SUITES:
        known = ", ".join(sorted(SUITES) + ["all"])
        print(f"error: unknown suite {name!r} (known: {known})", file=sys.stderr)
        return 2
    results = run_suite_checks(name, args.seed)
    lines = []
    for r in results:
        mark = {"PASS": "PASS", "FAIL": "FAIL", "UNDECIDED": "UNDECIDED"}[r.outcome]
        detail = f"  ({r.detail})" if r.detail else ""
        line = f"[{mark}] {r.suite}.{r.name}{detail}"
        lines.append(line)
        print(line)
    fails = sum(1 for r in results if r.failed)
    und = sum(1 for r in results if r.outcome == "UNDECIDED")
    print(f"suite {name}: {len(results) - fails - und} passed, {fails} failed, "
          f"{und} undecided (seed {args.seed})")
    if args.output:
        payload = {
            "suite": name,
            "seed": args.seed,
            "checks": [{"suite": r.suite, "name": r.name, "outcome": r.outcome,
                        "detail": r.detail} for r in results],
        }
        try:
            Path(args.output).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return 2
    return 1 if fails else 0


def _cmd_eval(args) -> int:
    try:
        inline = json.loads(args.json)
    except json.JSONDecodeError as exc:
        print(f"error: bad inline JSON: {exc}", file=sys.stderr)
        return 2
    if args.op not in OPERATIONS:
        print(f"error: unknown operation {args.op!r}", file=sys.stderr)
        return 2
    doc = {
        "schema_version": 1,
        "space": inline.get("space"),
        "sets": inline.get("sets", {}),
        "grid": inline.get("grid"),
        "seed": inline.get("seed", 0),
        "tolerance": inline.get("tolerance", 1e-9),
        "queries": [{"op": args.op, "args": inline.get("args", {}),
                     **({"expect": inline["expect"]} if "expect" in inline else {})}],
    }
    doc = {k: v for k, v in doc.items() if v is not None}
    try:
        report = run_scenario_doc(doc, Path.cwd(),
                                  tolerance_override=args.tolerance,
                                  pitch_override=args.grid_pitch)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    record = report["queries"][0]
    print(json.dumps(record, indent=2, sort_keys=True))
    if record["error"] is not None and record["expect_ok"] is None:
        return 2
    if record["expect_ok"] is False:
        return 1
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qpos",
                                     description="q-positivity workbench for SSD spaces")
    parser.add_argument("--tolerance", type=float, default=None,
                        help="override the scenario tolerance")
    parser.add_argument("--grid-pitch", type=float, default=None,
                        help="override the scenario grid pitch")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file and emit a JSON report")
    p_run.add_argument("scenario")
    p_run.add_argument("-o", "--output", default=None)

    p_suite = sub.add_parser("suite", help="run a property-test battery")
    p_suite.add_argument("name")
    p_suite.add_argument("--seed", type=int, default=0)
    p_suite.add_argument("-o", "--output", default=None)

    p_eval = sub.add_parser("eval", help="evaluate one operation from inline JSON")
    p_eval.add_argument("op")
    p_eval.add_argument("json")

    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "suite":
        return _cmd_suite(args)
    return _cmd_eval(args)


if __name__ == "__main__":
    sys.exit(main())
