"""Race harness: scenarios, pipelines, execution, rendering, benchmarks."""

from .bench import BenchReport, benchmark
from .race import RaceResult, build_engine, result_from_log, run_race, score_race
from .render import RenderOptions, replay_render
from .scenario import (Scenario, lint_scenario, lint_scenario_dict,
                       load_scenario, scenario_from_dict)

__all__ = [
    "BenchReport", "benchmark",
    "RaceResult", "build_engine", "result_from_log", "run_race", "score_race",
    "RenderOptions", "replay_render",
    "Scenario", "lint_scenario", "lint_scenario_dict", "load_scenario",
    "scenario_from_dict",
]
