#!/usr/bin/env python3
"""
Command-line front end for the search-and-pickup mission simulator.

Subcommands:
  run         simulate one mission
  sweep       run every strategy over several time limits and seeds, write CSV
  replay      re-check a mission log
  properties  randomised checks of the reward prediction

Exit codes: 0 success, 1 invariant violation, 2 configuration error.
"""

import argparse
import os
import sys
import time
from datetime import datetime

from src.errors import ConfigError, DomainError, ReplayParseError
from src.mission_simulator import run_mission
from src.property_suite import run_property_suite
from src.replay_checker import replay
from src.scenario_config import STRATEGIES, ScenarioConfig, apply_overrides, load_config, parse_crash
from src.sweep_runner import SweepSpec, emit_csv, run_sweep

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


def _float_list(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ConfigError(f"Invalid number list: {text!r}")


def command_run(args) -> int:
    config = load_config(args.config)
    crashes = list(config['crashes']) + [parse_crash(c) for c in args.crash or []]
    config = apply_overrides(config, {'seed': args.seed, 'strategy': args.strategy, 't0': args.t0,
                                      'uav_count': args.uav_count, 'crashes': crashes})
    cfg = ScenarioConfig.from_dict(config)

    report = run_mission(cfg, debug=args.debug)
    if args.log:
        report.write_log(args.log)
    if args.report:
        report.save(args.report)

    print(f"Strategy: {cfg.strategy}")
    print(f"Seed: {cfg.seed}")
    print(f"Time limit: {cfg.t0:.0f} s")
    print(f"Final score: {report.score}")
    print(f"Delivered: {len(report.delivered)} objects, lost: {len(report.lost)}")
    if args.log:
        print(f"Event log saved to: {args.log}")
    if args.report:
        print(f"Report saved to: {args.report}")
    return EXIT_OK


def command_sweep(args) -> int:
    config = load_config(args.config)
    if args.uav_count is not None:
        config['uav_count'] = args.uav_count
    spec = SweepSpec(
        t0_values=tuple(_float_list(args.t0_values)) if args.t0_values else SweepSpec().t0_values,
        trials_per_t0=args.trials,
        strategies=tuple(s.strip() for s in args.strategies.split(',')) if args.strategies else STRATEGIES,
        base_seed=args.base_seed,
    )
    for strategy in spec.strategies:
        if strategy not in STRATEGIES:
            raise ConfigError(f"Unknown strategy: {strategy}")

    output_dir = os.path.dirname(args.output)
    if output_dir and not os.path.exists(output_dir):
        os.makedirs(output_dir)
        print(f"Created output directory: {output_dir}")

    jobs = args.jobs if args.jobs else 1
    result = run_sweep(spec, config, jobs=jobs, timing=args.timing, log_dir=args.log_dir, debug=args.debug)
    rows_path, summary = emit_csv(result, args.output)

    print(f"Missions run: {len(result.rows)}")
    print(f"Results saved to: {rows_path}")
    print(f"Aggregates saved to: {summary}")
    return EXIT_OK


def command_replay(args) -> int:
    try:
        result = replay(args.log_path)
    except ReplayParseError as e:
        print(f"Malformed log {args.log_path}: {e}")
        return EXIT_VIOLATION

    if args.report:
        result.report.save(args.report)
    print(f"Replayed score: {result.report.score}")
    print(f"Deliveries: {len(result.report.delivered)}, decisions: {result.report.decisions}")
    if result.violations:
        print(f"Invariant violations: {len(result.violations)}")
        for violation in result.violations:
            print(f"  {violation}")
        return EXIT_VIOLATION
    print("All invariants hold")
    return EXIT_OK


def command_properties(args) -> int:
    report = run_property_suite(instances=args.instances, seed=args.seed, debug=args.debug)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Multi-UAV search-and-pickup mission planner and simulator')
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='Simulate a single mission')
    run.add_argument('--config', type=str, default=None, help='Scenario JSON file (defaults if omitted)')
    run.add_argument('--seed', type=int, required=True, help='Random seed for object placement and motion')
    run.add_argument('--strategy', type=str, required=True, choices=STRATEGIES, help='Decision strategy')
    run.add_argument('--t0', type=float, required=True, help='Mission time limit in seconds')
    run.add_argument('--uav-count', type=int, default=None, help='Number of agents')
    run.add_argument('--crash', action='append', metavar='AGENT@TIME',
                     help='Crash an agent at a given time; may be repeated')
    run.add_argument('--log', type=str, default=None, help='Write the event log to this file')
    run.add_argument('--report', type=str, default=None, help='Write the mission report (JSON) to this file')
    run.add_argument('--debug', action='store_true', help='Enable debug mode with progress output')
    run.set_defaults(handler=command_run)

    sweep = sub.add_parser('sweep', help='Run strategies over time limits and paired seeds')
    sweep.add_argument('--config', type=str, default=None, help='Scenario JSON file (defaults if omitted)')
    sweep.add_argument('--t0-values', type=str, default=None, help='Comma-separated time limits (default 100..900)')
    sweep.add_argument('--trials', type=int, default=5, help='Trials per time limit')
    sweep.add_argument('--strategies', type=str, default=None, help='Comma-separated strategies (default all)')
    sweep.add_argument('--base-seed', type=int, default=0, help='Seed of the first trial')
    sweep.add_argument('--uav-count', type=int, default=None, help='Number of agents')
    sweep.add_argument('--jobs', type=int, default=None, help='Worker processes (default 1)')
    sweep.add_argument('--output', type=str, default='sweep_results.csv', help='Result CSV path')
    sweep.add_argument('--log-dir', type=str, default=None, help='Directory for per-mission event logs')
    sweep.add_argument('--timing', action='store_true', help='Record wall-clock runtime_ms (otherwise 0)')
    sweep.add_argument('--debug', action='store_true', help='Enable debug mode with progress output')
    sweep.set_defaults(handler=command_sweep)

    rep = sub.add_parser('replay', help='Re-check a mission event log')
    rep.add_argument('log_path', type=str, help='Event log written by run --log')
    rep.add_argument('--report', type=str, default=None, help='Write the replayed report (JSON) to this file')
    rep.set_defaults(handler=command_replay)

    props = sub.add_parser('properties', help='Randomised checks of the reward prediction')
    props.add_argument('--instances', type=int, default=100, help='Random instances per check')
    props.add_argument('--seed', type=int, default=0, help='Random seed')
    props.add_argument('--debug', action='store_true', help='Enable debug mode with progress output')
    props.set_defaults(handler=command_properties)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, 'debug', False):
        start_time = time.time()
        print(f"\nExecution started at: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    try:
        code = args.handler(args)
    except (ConfigError, DomainError) as e:
        print(f"Configuration error: {e}")
        return EXIT_CONFIG
    if getattr(args, 'debug', False):
        print(f"Total execution time: {time.time() - start_time:.2f} seconds")
    return code


if __name__ == '__main__':
    sys.exit(main())
