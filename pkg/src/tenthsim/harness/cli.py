"""Command-line interface: race, replay, lint, bench, raceline.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 the race
finished but an optimization-based controller hit its iteration cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_DEGRADED = 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tenthsim",
        description="Deterministic 2D autonomous-racing simulator harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_race = sub.add_parser("race", help="run race scenarios to completion")
    p_race.add_argument("scenario", nargs="+", help="scenario JSON path(s)")
    p_race.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    p_race.add_argument("--out", default="out", help="output directory")
    p_race.add_argument("--parallel", type=int, default=1,
                        help="run multiple scenarios in N worker processes")

    p_replay = sub.add_parser("replay", help="render a race log to PNG frames")
    p_replay.add_argument("log", help="JSONL race log")
    p_replay.add_argument("--out", required=True, help="frame directory")
    p_replay.add_argument("--stride", type=int, default=10,
                          help="render every K-th tick")

    p_lint = sub.add_parser("lint", help="validate a scenario file")
    p_lint.add_argument("scenario", help="scenario JSON path")

    p_bench = sub.add_parser("bench", help="measure simulation throughput")
    p_bench.add_argument("scenario", help="scenario JSON path")
    p_bench.add_argument("--reps", type=int, default=3)
    p_bench.add_argument("--sim-seconds", type=float, default=10.0)
    p_bench.add_argument("--out", default=None, help="CSV report path")

    p_raceline = sub.add_parser("raceline",
                                help="optimize a raceline for a centerline CSV")
    p_raceline.add_argument("track", help="centerline CSV path or bundled name")
    p_raceline.add_argument("--out", required=True, help="output CSV path")
    p_raceline.add_argument("--vehicle-width", type=float, default=0.31)

    args = parser.parse_args(argv)
    threads = os.environ.get("TENTHSIM_THREADS")
    if threads:
        _cap_threads(int(threads))

    try:
        return _dispatch(args)
    except BrokenPipeError:
        return EXIT_RUNTIME


def _dispatch(args) -> int:
    from ..errors import ScenarioError, TenthSimError
    from .scenario import lint_scenario, load_scenario

    if args.command == "lint":
        problems = lint_scenario(args.scenario)
        if problems:
            for p in problems:
                print(f"violation: {p}")
            return EXIT_VALIDATION
        print("ok")
        return EXIT_OK

    if args.command == "race":
        if len(args.scenario) == 1 and args.parallel <= 1:
            code, payload = _race_one(args.scenario[0], args.out, args.seed)
            print(payload if isinstance(payload, str)
                  else json.dumps(payload, sort_keys=True, indent=2),
                  file=sys.stderr if code in (EXIT_VALIDATION, EXIT_RUNTIME)
                  else sys.stdout)
            return code
        # independent scenarios on seed-isolated engines, one per process
        from concurrent.futures import ProcessPoolExecutor
        codes = []
        with ProcessPoolExecutor(max_workers=max(args.parallel, 1)) as pool:
            futures = [pool.submit(_race_one, path, args.out, args.seed)
                       for path in args.scenario]
            for path, future in zip(args.scenario, futures):
                code, payload = future.result()
                codes.append(code)
                summary = payload if isinstance(payload, str) else \
                    (f"winner={payload['winner']} laps={payload['lap_counts']} "
                     f"termination={payload['termination']}")
                print(f"{path}: exit {code}, {summary}")
        for severity in (EXIT_RUNTIME, EXIT_VALIDATION, EXIT_DEGRADED):
            if severity in codes:
                return severity
        return EXIT_OK

    if args.command == "replay":
        from .render import RenderOptions, replay_render
        try:
            frames = replay_render(args.log, args.out,
                                   RenderOptions(stride=args.stride))
        except ScenarioError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"wrote {len(frames)} frames to {args.out}")
        return EXIT_OK

    if args.command == "bench":
        from .bench import benchmark
        try:
            scenario = load_scenario(args.scenario)
            report = benchmark(scenario, repetitions=args.reps,
                               max_sim_seconds=args.sim_seconds,
                               csv_path=args.out)
        except ScenarioError as exc:
            print(f"validation error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        for row in report.rows:
            print(f"rep {row['repetition']}: {row['realtime_ratio']:.1f}x "
                  f"real time end-to-end, {row['engine_ratio']:.1f}x "
                  f"simulation only ({row['sim_seconds']:.2f} sim s in "
                  f"{row['wall_seconds']:.2f} s)")
        print(f"mean: {report.realtime_ratio:.1f}x end-to-end, "
              f"{report.engine_ratio:.1f}x simulation")
        return EXIT_OK

    if args.command == "raceline":
        from ..planning.raceline import min_curvature_raceline
        from ..track import load_centerline_file, save_centerline, Track
        from .scenario import data_dir
        try:
            path = Path(args.track)
            bundled = data_dir() / f"{args.track}_track.csv"
            track = load_centerline_file(bundled if bundled.exists() else path)
            raceline = min_curvature_raceline(track, args.vehicle_width)
        except (TenthSimError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        out_track = Track.from_waypoints(raceline.xs, raceline.ys,
                                         w_left=0.0 * raceline.xs + 0.1,
                                         w_right=0.0 * raceline.xs + 0.1)
        save_centerline(out_track, args.out, velocities=raceline.vs)
        print(f"wrote raceline ({raceline.n_points} points) to {args.out}")
        return EXIT_OK

    return EXIT_VALIDATION


def _race_one(scenario_path, out_dir, seed):
    """Run one scenario; returns (exit_code, result dict or error string).

    Module-level so process pools can pickle it.
    """
    from .race import run_race
    from .scenario import lint_scenario, load_scenario
    from ..errors import ScenarioError, TenthSimError

    try:
        problems = lint_scenario(scenario_path)
        if problems:
            return EXIT_VALIDATION, "; ".join(f"violation: {p}" for p in problems)
        scenario = load_scenario(scenario_path)
        result = run_race(scenario, out_dir, seed=seed)
    except ScenarioError as exc:
        return EXIT_VALIDATION, f"validation error: {exc}"
    except (TenthSimError, OSError) as exc:
        return EXIT_RUNTIME, f"runtime error: {exc}"
    code = EXIT_DEGRADED if result.solver_degraded else EXIT_OK
    return code, result.to_dict()


def _cap_threads(n: int) -> None:
    os.environ.setdefault("OMP_NUM_THREADS", str(n))
    os.environ.setdefault("OPENBLAS_NUM_THREADS", str(n))
    try:
        import numba
        numba.set_num_threads(max(n, 1))
    except (ImportError, ValueError):
        pass


if __name__ == "__main__":
    sys.exit(main())
