"""Command-line entry point: ``mmcast run | export-lp | validate | scenario | solve``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ALGORITHMS, RX_MODES, ConfigError, load_config
from .harness import run_algorithm, run_experiment
from .lp import export_lp
from .metrics import compute_metrics
from .schedule import ScheduleError, UnreachableError, load_schedule, save_schedule, validate
from .topology import generate_scenario, load_scenario, save_scenario


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    overrides = {}
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.trace:
        overrides["trace"] = True
    if args.max_nodes is not None:
        overrides["max_nodes"] = args.max_nodes
    if args.max_seconds is not None:
        overrides["max_seconds"] = args.max_seconds
    config = dataclasses.replace(config, **overrides)
    result = run_experiment(config, parallel=args.parallel)
    for name, path in result.paths.items():
        print(f"{name}: {path}")
    return 0


def _cmd_export_lp(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    text = export_lp(scenario, args.smax, rx_mode=args.rx_mode)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    schedule = load_schedule(args.schedule)
    violations = validate(schedule, scenario, args.rx_mode)
    for v in violations:
        print(v)
    if violations:
        return 1
    print(f"ok: {schedule.n_slots} slots, T = {schedule.total_time_s!r} s")
    return 0


def _cmd_scenario(args: argparse.Namespace) -> int:
    scenario = generate_scenario(args.n, args.w, args.seed, area_side=args.area_side)
    save_scenario(scenario, args.out)
    print(args.out)
    return 0


def _cmd_solve(args: argparse.Namespace) -> int:
    from .config import ExperimentConfig

    scenario = load_scenario(args.scenario)
    config = ExperimentConfig(
        algorithms=(args.algorithm,),
        n_values=(scenario.n,),
        w_values_deg=(scenario.beamwidth_deg,),
        rx_mode=args.rx_mode,
        max_nodes=args.max_nodes,
        max_seconds=args.max_seconds,
    )
    schedule, proven = run_algorithm(args.algorithm, scenario, config, args.seed)
    if args.out:
        save_schedule(schedule, args.out)
    report = compute_metrics(schedule, scenario).to_dict()
    if proven is not None:
        report["optimal_proven"] = proven
    print(json.dumps(report, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmcast", description="mmWave multicast scheduling experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--trace", action="store_true", help="write every schedule as JSON")
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--max-seconds", type=float)
    p.add_argument("--parallel", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("export-lp", help="write the scheduling model in LP format")
    p.add_argument("--scenario", required=True)
    p.add_argument("--smax", type=int, required=True)
    p.add_argument("--rx-mode", choices=RX_MODES, default="omni")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_export_lp)

    p = sub.add_parser("validate", help="check a schedule against a scenario")
    p.add_argument("--schedule", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--rx-mode", choices=RX_MODES, default="omni")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("scenario", help="generate a random scenario file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--w", type=float, default=45.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--area-side", type=float, default=200.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("solve", help="schedule one scenario with one algorithm")
    p.add_argument("--scenario", required=True)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="exact")
    p.add_argument("--rx-mode", choices=RX_MODES, default="omni")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--max-seconds", type=float)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except UnreachableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ScheduleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
