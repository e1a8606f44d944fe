"""Race execution: wire pipelines to the engine, log every tick, score."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..engine import AgentSetup, Engine, SimConfig, StepResult
from ..errors import ScenarioError
from ..vehicle import ControlInput
from .pipeline import AgentPipeline, OpponentTracker, build_world
from .scenario import (Scenario, resolve_map, resolve_start_line,
                       resolve_track)

LOG_SCHEMA_VERSION = 1
SCAN_LOG_BEAM_STRIDE = 30     # log every 30th beam for the replay renderer
PLAN_LOG_POINT_STRIDE = 4


@dataclass(frozen=True)
class RaceResult:
    scenario_name: str
    race_type: str
    config_hash: str
    winner: str                  # "agent-00", "TIE", or "NONE"
    finish_order: tuple
    lap_counts: tuple
    lap_times: tuple             # tuple of per-agent tuples
    best_laps: tuple             # None when no lap completed
    collisions: tuple            # collision_with string per agent
    sim_time: float
    termination: str             # LAPS / TIMEOUT / ALL_COLLIDED
    solver_degraded: bool
    log_path: str

    def to_dict(self) -> dict:
        return {
            "scenario_name": self.scenario_name,
            "race_type": self.race_type,
            "config_hash": self.config_hash,
            "winner": self.winner,
            "finish_order": list(self.finish_order),
            "lap_counts": list(self.lap_counts),
            "lap_times": [list(t) for t in self.lap_times],
            "best_laps": list(self.best_laps),
            "collisions": list(self.collisions),
            "sim_time": self.sim_time,
            "termination": self.termination,
            "solver_degraded": self.solver_degraded,
            "log_path": self.log_path,
        }


def build_engine(scenario: Scenario):
    """Engine + shared world assets for a validated scenario."""
    grid = resolve_map(scenario)
    track = resolve_track(scenario)
    start_line = resolve_start_line(scenario, track)
    setups = tuple(
        AgentSetup(params=a.vehicle_params(), scan_spec=a.scan_spec(),
                   start_pose=a.pose(), gps=scenario.gps_config())
        for a in scenario.agents)
    config = SimConfig(grid=grid, agents=setups,
                       physics_dt=scenario.physics_dt,
                       control_every=scenario.control_every,
                       seed=scenario.seed, start_line=start_line,
                       lap_target=scenario.laps, timeout=scenario.timeout)
    return Engine(config), grid, track


def run_race(scenario: Scenario, out_dir, seed: int | None = None) -> RaceResult:
    """Run a scenario to termination; writes JSONL log, result, and metadata.

    The log and result are byte-reproducible for a given scenario + seed;
    wall-clock numbers go to a separate metadata file.
    """
    if seed is not None:
        raw = dict(scenario.raw)
        raw["seed"] = seed
        from .scenario import scenario_from_dict
        scenario = scenario_from_dict(raw)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / f"{scenario.name}.jsonl"
    result_path = out_dir / f"{scenario.name}_result.json"
    meta_path = out_dir / f"{scenario.name}_meta.json"

    engine, grid, track = build_engine(scenario)
    world = build_world(scenario, grid, track)
    pipelines = [AgentPipeline(i, a, scenario, world)
                 for i, a in enumerate(scenario.agents)]
    tracker = OpponentTracker(track, [p.params for p in pipelines])

    wall_start = time.perf_counter()
    obs = engine.reset()
    tick = 0
    with open(log_path, "w") as log:
        header = {
            "type": "header",
            "log_version": LOG_SCHEMA_VERSION,
            "scenario_name": scenario.name,
            "race_type": scenario.race_type,
            "config_hash": scenario.config_hash,
            "seed": scenario.seed,
            "physics_dt": scenario.physics_dt,
            "control_every": scenario.control_every,
            "map": scenario.map_ref,
            "track": scenario.track_ref,
            "num_agents": len(scenario.agents),
            "scan_fov": [p.scan_spec.fov for p in pipelines],
            "scan_beams": [p.scan_spec.num_beams for p in pipelines],
            "scan_beam_stride": SCAN_LOG_BEAM_STRIDE,
            "lap_target": scenario.laps,
            "timeout": scenario.timeout,
        }
        log.write(json.dumps(header, sort_keys=True) + "\n")

        while not obs.done:
            actions = []
            estimates = []
            if tick % scenario.plan_every == 0:
                tracker.update(obs.agents)  # opponents only matter to planners
            for i, pipe in enumerate(pipelines):
                if engine.collided(i):
                    actions.append(ControlInput(0.0, 0.0))
                    estimates.append(obs.agents[i].pose)
                    continue
                command, estimate = pipe.step(obs.agents[i],
                                              tracker.views_excluding(i))
                actions.append(command)
                estimates.append(estimate)

            log.write(json.dumps(_tick_record(tick, obs, actions, estimates,
                                              pipelines), sort_keys=True) + "\n")
            obs = engine.step(actions)
            tick += 1

        log.write(json.dumps(_tick_record(tick, obs, None, None, pipelines),
                             sort_keys=True) + "\n")
    wall_elapsed = time.perf_counter() - wall_start

    result = score_race(scenario, obs, str(log_path),
                        solver_degraded=any(p.degraded for p in pipelines))
    result_path.write_text(json.dumps(result.to_dict(), sort_keys=True,
                                      indent=2) + "\n")
    meta_path.write_text(json.dumps({
        "wall_seconds": wall_elapsed,
        "sim_seconds": obs.sim_time,
        "realtime_ratio": obs.sim_time / wall_elapsed if wall_elapsed > 0 else None,
    }, sort_keys=True, indent=2) + "\n")
    return result


def _tick_record(tick: int, obs: StepResult, actions, estimates, pipelines) -> dict:
    agents = []
    for i, a in enumerate(obs.agents):
        rec = {
            "pose": [a.pose.x, a.pose.y, a.pose.theta],
            "v": a.v,
            "delta": a.delta,
            "col": a.collision,
            "col_with": a.collision_with,
            "lap": a.lap_count,
            "lap_times": list(a.lap_times),
        }
        if estimates is not None:
            est = estimates[i]
            rec["est"] = [est.x, est.y, est.theta]
        if actions is not None:
            rec["action"] = [actions[i].steer_rate, actions[i].accel]
            rec["aeb"] = pipelines[i].aeb_active
        if tick % 10 == 0:
            rec["scan"] = [round(float(r), 4)
                           for r in a.scan.ranges[::SCAN_LOG_BEAM_STRIDE]]
            traj = pipelines[i].trajectory
            if traj is not None:
                rec["plan"] = [[round(float(x), 3), round(float(y), 3)]
                               for x, y in traj.as_xy()[::PLAN_LOG_POINT_STRIDE]]
            pred = pipelines[i].mpc_prediction
            if pred is not None:
                rec["mpc_pred"] = [[round(float(x), 3), round(float(y), 3)]
                                   for x, y in pred[:, :2]]
        agents.append(rec)
    return {"type": "tick", "tick": tick, "t": obs.sim_time,
            "done": obs.done, "agents": agents}


def score_race(scenario: Scenario, final: StepResult, log_path: str,
               solver_degraded: bool = False) -> RaceResult:
    """Winner by laps, then earliest final crossing time; TIE when equal."""
    n = len(final.agents)
    lap_counts = tuple(a.lap_count for a in final.agents)
    lap_times = tuple(tuple(a.lap_times) for a in final.agents)
    best_laps = tuple(min(t) if t else None for t in lap_times)
    collisions = tuple(a.collision_with for a in final.agents)

    def finish_key(i):
        total = sum(lap_times[i]) if lap_times[i] else float("inf")
        return (-lap_counts[i], total)

    order = tuple(sorted(range(n), key=finish_key))
    if n == 1:
        winner = f"agent-{order[0]:02d}" if lap_counts[order[0]] >= scenario.laps \
            else "NONE"
    else:
        best, second = order[0], order[1]
        if finish_key(best) == finish_key(second):
            winner = "TIE"
        else:
            winner = f"agent-{best:02d}"

    if max(lap_counts) >= scenario.laps:
        termination = "LAPS"
    elif all(a.collision for a in final.agents):
        termination = "ALL_COLLIDED"
    else:
        termination = "TIMEOUT"

    return RaceResult(
        scenario_name=scenario.name,
        race_type=scenario.race_type,
        config_hash=scenario.config_hash,
        winner=winner,
        finish_order=tuple(f"agent-{i:02d}" for i in order),
        lap_counts=lap_counts,
        lap_times=lap_times,
        best_laps=best_laps,
        collisions=collisions,
        sim_time=final.sim_time,
        termination=termination,
        solver_degraded=solver_degraded,
        log_path=str(log_path),
    )


def result_from_log(log_path) -> dict:
    """Recompute the race outcome from a log alone (log = source of truth)."""
    header = None
    last = None
    with open(log_path) as f:
        for line in f:
            rec = json.loads(line)
            if rec.get("type") == "header":
                header = rec
            else:
                last = rec
    if header is None or last is None:
        raise ScenarioError(f"log {log_path} has no header/tick records")
    lap_counts = [a["lap"] for a in last["agents"]]
    lap_times = [a["lap_times"] for a in last["agents"]]
    collisions = [a["col_with"] for a in last["agents"]]

    n = len(lap_counts)
    def finish_key(i):
        total = sum(lap_times[i]) if lap_times[i] else float("inf")
        return (-lap_counts[i], total)

    order = sorted(range(n), key=finish_key)
    lap_target = header.get("lap_target") or 0
    if n == 1:
        winner = f"agent-{order[0]:02d}" if lap_counts[order[0]] >= lap_target \
            else "NONE"
    elif finish_key(order[0]) == finish_key(order[1]):
        winner = "TIE"
    else:
        winner = f"agent-{order[0]:02d}"

    if max(lap_counts) >= lap_target:
        termination = "LAPS"
    elif all(c != "NONE" for c in collisions):
        termination = "ALL_COLLIDED"
    else:
        termination = "TIMEOUT"

    return {
        "scenario_name": header["scenario_name"],
        "config_hash": header["config_hash"],
        "lap_counts": lap_counts,
        "lap_times": lap_times,
        "collisions": collisions,
        "sim_time": last["t"],
        "winner": winner,
        "finish_order": [f"agent-{i:02d}" for i in order],
        "termination": termination,
    }
