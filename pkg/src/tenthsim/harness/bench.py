"""Throughput benchmarking: sim-seconds per wall-second plus per-phase timings."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

from ..vehicle import ControlInput
from .pipeline import AgentPipeline, OpponentTracker, build_world
from .race import build_engine
from .scenario import Scenario


@dataclass(frozen=True)
class BenchReport:
    rows: list            # one dict per repetition
    csv_path: str | None

    @property
    def realtime_ratio(self) -> float:
        return sum(r["realtime_ratio"] for r in self.rows) / len(self.rows)

    @property
    def engine_ratio(self) -> float:
        """Simulation-only throughput (excludes planning and control)."""
        return sum(r["engine_ratio"] for r in self.rows) / len(self.rows)


def benchmark(scenario: Scenario, repetitions: int = 3,
              max_sim_seconds: float = 10.0,
              csv_path=None) -> BenchReport:
    """Run the scenario `repetitions` times, timing each pipeline phase.

    Each repetition simulates up to max_sim_seconds and reports sim-seconds
    per wall-second plus the cumulative time spent in sensing+physics
    (engine step), planning, and control. `engine_ratio` is the throughput
    of the simulation alone, which is what the faster-than-real-time claim
    is about; `realtime_ratio` includes the whole autonomy stack. Rows are
    written as CSV when a path is given.
    """
    rows = []
    for rep in range(repetitions):
        engine, grid, track = build_engine(scenario)
        world = build_world(scenario, grid, track)
        pipelines = [AgentPipeline(i, a, scenario, world)
                     for i, a in enumerate(scenario.agents)]
        tracker = OpponentTracker(track, [p.params for p in pipelines])

        t_plan = 0.0
        t_control = 0.0
        t_engine = 0.0
        ticks = 0
        wall0 = time.perf_counter()
        obs = engine.reset()
        while not obs.done and obs.sim_time < max_sim_seconds:
            actions = []
            if ticks % scenario.plan_every == 0:
                tracker.update(obs.agents)
            for i, pipe in enumerate(pipelines):
                if engine.collided(i):
                    actions.append(ControlInput(0.0, 0.0))
                    continue
                opponents = tracker.views_excluding(i)
                t0 = time.perf_counter()
                estimate = pipe.localize(obs.agents[i])
                if not pipe.spec.idle:
                    pipe.plan(estimate, obs.agents[i], opponents)
                t1 = time.perf_counter()
                actions.append(pipe.control(estimate, obs.agents[i]))
                pipe._tick += 1
                t2 = time.perf_counter()
                t_plan += t1 - t0
                t_control += t2 - t1
            t0 = time.perf_counter()
            obs = engine.step(actions)
            t_engine += time.perf_counter() - t0
            ticks += 1
        wall = time.perf_counter() - wall0
        rows.append({
            "repetition": rep,
            "sim_seconds": obs.sim_time,
            "wall_seconds": wall,
            "realtime_ratio": obs.sim_time / wall if wall > 0 else float("inf"),
            "engine_ratio": obs.sim_time / t_engine if t_engine > 0 else float("inf"),
            "ticks": ticks,
            "engine_seconds": t_engine,
            "plan_seconds": t_plan,
            "control_seconds": t_control,
        })

    if csv_path is not None:
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with open(csv_path, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
    return BenchReport(rows=rows, csv_path=str(csv_path) if csv_path else None)
