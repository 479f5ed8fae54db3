"""``tangtoys`` command line.

Exit codes: 0 success, 1 validation error, 2 internal invariant violation
(including a replay that does not reproduce the logged classifications).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .config import build_configs, load_config_file
from .errors import InvariantViolation, ValidationError
from .interaction_log import logged_classifications, replay_classifications
from .scenario import parse_scenario
from .sim import Trace, analyze, run

log = logging.getLogger("tangtoys")

EXIT_OK, EXIT_VALIDATION, EXIT_INVARIANT = 0, 1, 2


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None


def _configs(args, scenario_overrides=None):
    layers = [scenario_overrides or {}]
    if args.config:
        layers.append(load_config_file(args.config))
    flags = {}
    for attr, key in (("seed", "radio.seed"), ("range_m", "radio.range_m"), ("loss", "radio.loss_prob")):
        value = getattr(args, attr, None)
        if value is not None:
            flags[key] = str(value)
    layers.append(flags)
    return build_configs(*layers)


def cmd_run(args) -> int:
    scenario = parse_scenario(_read(args.scenario))
    cfg, th, policy = _configs(args, scenario.overrides)
    result = run(scenario, cfg, th, policy)
    text = result.trace.to_text()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        if analyze(Trace.from_text(text)) != result.stats:
            raise InvariantViolation("statistics recomputed from the trace differ from the live run")
        log.info("wrote %d records to %s", len(result.trace.records), args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    stats = analyze(Trace.from_text(_read(args.trace)))
    rows = stats.rows(args.device)
    if args.device is not None and not rows:
        raise ValidationError(f"device {args.device!r} does not appear in the trace")
    if args.format == "csv":
        fields = list(rows[0]) if rows else ["device"]
        w = csv.DictWriter(sys.stdout, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return EXIT_OK
    for row in rows:
        print(row["device"])
        for k, v in row.items():
            if k != "device":
                print(f"  {k:<20} {v}")
        timeline = stats.affect_timeline.get(row["device"], [])
        if timeline:
            print("  affect timeline      " + " ".join(f"{t}:{a.value}" for t, a in timeline))
    return EXIT_OK


def cmd_replay(args) -> int:
    records = Trace.from_text(_read(args.trace)).records
    _, th, _ = _configs(args)
    replayed = replay_classifications(records, th)
    logged = logged_classifications(records)
    mismatches = [(a, b) for a, b in zip(replayed, logged) if a != b]
    if len(replayed) != len(logged):
        print(f"mismatch: {len(replayed)} windows replayed, {len(logged)} classifications logged")
        return EXIT_INVARIANT
    for got, want in mismatches:
        print(f"mismatch at {want.t_ms} ms on {want.device_id}: logged {want.classes()} replayed {got.classes()}")
    if mismatches:
        return EXIT_INVARIANT
    print(f"match: {len(logged)} classifications reproduced")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tangtoys")
    parser.add_argument("-v", "--verbose", action="store_true")
    top = parser.add_subparsers(dest="group", required=True)
    sim = top.add_parser("sim", help="simulate toys and inspect traces")
    sub = sim.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario and write its trace")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int)
    p.add_argument("--range-m", type=float, dest="range_m")
    p.add_argument("--loss", type=float)
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="recompute statistics from a trace")
    p.add_argument("trace")
    p.add_argument("--device")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("replay", help="re-classify logged windows and compare")
    p.add_argument("trace")
    p.add_argument("--config")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except Exception as exc:  # any other failure is our bug, not the user's input
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
