"""
Command line entry point: run a scenario once, serve the REST interface or check
a policy program.

    goalarbiter run scenarios/smart_home.json --mode verify
    goalarbiter serve --config service.yaml
    goalarbiter check-policy policies/east.policy
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import TextIO

from goalarbiter.config_reader import load_scenario, parse_config, parse_config_file
from goalarbiter.definitions import TOLERANCE
from goalarbiter.dsl import parse_policy, print_policy
from goalarbiter.errors import GoalArbiterError
from goalarbiter.pipeline import ReactionResult, react
from goalarbiter.server import ApiSession, Server
from goalarbiter.utils import json_number, numbers_close

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2


def getargs(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="goalarbiter", description=__doc__.splitlines()[1])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging, repeat for more")
    parser.add_argument("--debug", action="store_true", help="log everything")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one reaction over a scenario file")
    run.add_argument("scenario", help="scenario JSON file")
    run.add_argument("--mode", choices=("print", "verify", "json"), default="print")
    run.add_argument(
        "--policy", action="append", default=[], metavar="PATH", help="additional policy source, may be repeated"
    )
    run.add_argument("--tolerance", type=float, default=TOLERANCE, help="numeric tolerance of verify mode")

    serve = commands.add_parser("serve", help="serve the REST interface")
    serve.add_argument("--config", help="YAML service configuration")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.add_argument("--preload", metavar="SCENARIO", help="scenario loaded before serving")

    check = commands.add_parser("check-policy", help="parse a policy and print its canonical form")
    check.add_argument("path")

    return parser.parse_args(argv)


def log_level(args: argparse.Namespace) -> int:
    if args.debug:
        return logging.DEBUG
    return max(logging.WARNING - 10 * args.verbose, logging.DEBUG)


def render_tables(result: ReactionResult) -> str:
    """Requests, mediated requests and actions as plain text tables sorted for stable diffs"""
    sections = [
        (
            "Requests",
            ("zone", "instance", "value", "user"),
            sorted((x.zone, x.instance, json_number(x.value), x.user) for x in result.requests),
        ),
        (
            "Mediated",
            ("zone", "instance", "value"),
            sorted((x.zone, x.instance, json_number(x.value)) for x in result.mediated),
        ),
        ("Actions", ("actuator", "value"), sorted((x.actuator, json_number(x.value)) for x in result.actions)),
    ]

    lines = []
    for title, header, rows in sections:
        cells = [header, *[tuple(str(x) for x in row) for row in rows]]
        widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
        lines.append(f"{title} ({len(rows)})")
        for row in cells:
            lines.append("  " + "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
        lines.append("")
    return "\n".join(lines)


def compare_results(actual: ReactionResult, expected: ReactionResult, tolerance: float = TOLERANCE) -> list[str]:
    """List every difference between the mediated requests and actions of two results"""
    differences = []
    pairs = [
        (
            "mediated",
            {x.key: x.value for x in actual.mediated},
            {x.key: x.value for x in expected.mediated},
        ),
        (
            "actions",
            {x.actuator: x.value for x in actual.actions},
            {x.actuator: x.value for x in expected.actions},
        ),
    ]
    for section, got, want in pairs:
        for key in sorted(set(got) | set(want)):
            if key not in got:
                differences.append(f"{section}: missing {key} = {json_number(want[key])}")
            elif key not in want:
                differences.append(f"{section}: unexpected {key} = {json_number(got[key])}")
            elif not numbers_close(got[key], want[key], tolerance):
                differences.append(
                    f"{section}: {key} is {json_number(got[key])}, expected {json_number(want[key])}"
                )
    return differences


def run_scenario(args: argparse.Namespace, out: TextIO | None = None) -> int:
    scenario = load_scenario(args.scenario, args.policy)
    result = react(scenario.snapshot(), scenario.registry)

    if args.mode == "json":
        print(json.dumps(result.to_dict(), indent=2), file=out)
        return EXIT_OK

    if args.mode == "print":
        print(render_tables(result), end="", file=out)
        return EXIT_OK

    if scenario.expected is None:
        raise GoalArbiterError(f"scenario {scenario.name} has no expected result to verify against")
    differences = compare_results(result, scenario.expected, args.tolerance)
    if differences:
        print(f"FAIL {scenario.name}: {len(differences)} difference(s)", file=out)
        for line in differences:
            print(f"  {line}", file=out)
        return EXIT_MISMATCH

    print(f"PASS {scenario.name}: {len(result.mediated)} mediated requests, {len(result.actions)} actions", file=out)
    return EXIT_OK


def serve(args: argparse.Namespace) -> int:
    config = parse_config_file(args.config) if args.config else parse_config(None)
    if args.host:
        config.host = args.host
    if args.port is not None:
        config.port = args.port
    if args.preload:
        config.preload_scenario = Path(args.preload)
    if not args.verbose and not args.debug:
        logging.getLogger().setLevel(config.log_level)

    server = Server(ApiSession.from_config(config), config.host, config.port)
    try:
        server.run()
    except KeyboardInterrupt:
        logger.info("Interrupted")
    return EXIT_OK


def check_policy(args: argparse.Namespace, out: TextIO | None = None) -> int:
    try:
        with open(args.path, encoding="utf8") as f:
            source = f.read()
    except OSError as exc:
        raise GoalArbiterError(f"cannot read {args.path}: {exc.strerror}") from exc
    print(print_policy(parse_policy(source)), end="", file=out)
    return EXIT_OK


COMMANDS = {"run": run_scenario, "serve": serve, "check-policy": check_policy}


def main(argv: Sequence[str] | None = None) -> int:
    args = getargs(argv)
    logging.basicConfig(level=log_level(args))

    try:
        return COMMANDS[args.command](args)
    except GoalArbiterError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        for detail in exc.details:
            print(f"  {json.dumps(detail)}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
