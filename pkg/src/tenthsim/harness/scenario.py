"""Scenario files: a versioned JSON schema, loading, and lint validation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..collision import StartLine
from ..errors import ScenarioError
from ..geometry import Pose2D
from ..gridmap import OccupancyGridMap, load_map_files
from ..sensing import GpsConfig, ScanSpec
from ..track import Track, frenet_to_cartesian, load_centerline_file, track_pose_at, width_at
from ..vehicle import VehicleParams

SCHEMA_VERSION = 1
RACE_TYPES = ("OBSTACLE_AVOIDANCE", "TIMED_LAP", "HEAD_TO_HEAD")
LOCALIZATIONS = ("GROUND_TRUTH", "GPS", "PARTICLE_FILTER")
PLANNERS = ("GAP", "LANE_SWITCH", "FRENET", "GRAPH")
CONTROLLERS = ("PURE_PURSUIT", "STANLEY", "LQR", "MPC")


def data_dir() -> Path:
    return Path(__file__).resolve().parent.parent / "data"


@dataclass(frozen=True)
class AgentSpec:
    localization: str = "GROUND_TRUTH"
    planner: str = "LANE_SWITCH"
    controller: str = "PURE_PURSUIT"
    start_pose: tuple = (0.0, 0.0, 0.0)
    target_speed: float = 4.0
    idle: bool = False
    params: object = field(default_factory=dict)   # inline dict or file path
    scan: dict = field(default_factory=dict)

    def vehicle_params(self) -> VehicleParams:
        if isinstance(self.params, str):
            from ..vehicle import load_vehicle_params
            return load_vehicle_params(self.params)
        return VehicleParams.from_dict(self.params) if self.params else VehicleParams()

    def scan_spec(self) -> ScanSpec:
        if not self.scan:
            return ScanSpec()
        kwargs = dict(self.scan)
        if "mount_pose" in kwargs:
            kwargs["mount_pose"] = Pose2D(*kwargs["mount_pose"])
        return ScanSpec(**kwargs)

    def pose(self) -> Pose2D:
        return Pose2D(*self.start_pose)


@dataclass(frozen=True)
class Scenario:
    name: str
    race_type: str
    map_ref: str
    track_ref: str
    agents: tuple
    laps: int = 3
    timeout: float = 120.0
    seed: int = 0
    physics_dt: float = 0.01
    control_every: int = 1
    plan_every: int = 10
    pf_particles: int = 1000
    pf_every: int = 5
    n_lanes: int = 5
    start_line: dict | None = None
    gps: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def gps_config(self) -> GpsConfig:
        return GpsConfig(**self.gps) if self.gps else GpsConfig()


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(raw)


def scenario_from_dict(raw: dict) -> Scenario:
    version = raw.get("version")
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported scenario version {version!r}, "
                            f"expected {SCHEMA_VERSION}")
    try:
        agents = tuple(AgentSpec(**a) for a in raw["agents"])
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"bad agents section: {exc}") from exc
    known = {"version", "name", "race_type", "map", "track", "agents", "laps",
             "timeout", "seed", "physics_dt", "control_every", "plan_every",
             "pf_particles", "pf_every", "n_lanes", "start_line", "gps"}
    unknown = set(raw) - known
    if unknown:
        raise ScenarioError(f"unknown scenario field(s): {sorted(unknown)}")
    return Scenario(
        name=raw.get("name", "unnamed"),
        race_type=raw.get("race_type", "TIMED_LAP"),
        map_ref=raw.get("map", ""),
        track_ref=raw.get("track", ""),
        agents=agents,
        laps=raw.get("laps", 3),
        timeout=raw.get("timeout", 120.0),
        seed=raw.get("seed", 0),
        physics_dt=raw.get("physics_dt", 0.01),
        control_every=raw.get("control_every", 1),
        plan_every=raw.get("plan_every", 10),
        pf_particles=raw.get("pf_particles", 1000),
        pf_every=raw.get("pf_every", 5),
        n_lanes=raw.get("n_lanes", 5),
        start_line=raw.get("start_line"),
        gps=raw.get("gps", {}),
        raw=raw,
    )


def resolve_map(scenario: Scenario) -> OccupancyGridMap:
    """Bundled map name or a path to `<stem>.png` + `<stem>.yaml`."""
    ref = scenario.map_ref
    bundled = data_dir() / f"{ref}_map.png"
    if bundled.exists():
        return load_map_files(bundled, bundled.with_suffix(".yaml"))
    png = Path(ref)
    if not png.exists():
        raise ScenarioError(f"map not found: {ref!r} (no bundled map or file)")
    meta = png.with_suffix(".yaml")
    if not meta.exists():
        raise ScenarioError(f"map metadata not found next to {png}")
    return load_map_files(png, meta)


def resolve_track(scenario: Scenario) -> Track:
    ref = scenario.track_ref
    bundled = data_dir() / f"{ref}_track.csv"
    if bundled.exists():
        return load_centerline_file(bundled)
    path = Path(ref)
    if not path.exists():
        raise ScenarioError(f"track not found: {ref!r}")
    return load_centerline_file(path)


def resolve_start_line(scenario: Scenario, track: Track) -> StartLine:
    """Explicit start line, or one derived across the track at s = 0."""
    if scenario.start_line:
        sl = scenario.start_line
        return StartLine.from_points(sl["p0"], sl["p1"], sl["forward"])
    pose = track_pose_at(track, 0.0)
    wl, wr = width_at(track, 0.0)
    left = frenet_to_cartesian(track, 0.0, float(wl[0]))
    right = frenet_to_cartesian(track, 0.0, -float(wr[0]))
    import math
    return StartLine.from_points((right.x, right.y), (left.x, left.y),
                                 (math.cos(pose.theta), math.sin(pose.theta)))


def lint_scenario_dict(raw: dict, check_world: bool = True) -> list[str]:
    """Validate a scenario; returns a list of human-readable violations."""
    problems: list[str] = []
    try:
        scenario = scenario_from_dict(raw)
    except ScenarioError as exc:
        return [str(exc)]

    if scenario.race_type not in RACE_TYPES:
        problems.append(f"race_type {scenario.race_type!r} not one of {RACE_TYPES}")
    n = len(scenario.agents)
    if scenario.race_type == "HEAD_TO_HEAD" and n != 2:
        problems.append(f"HEAD_TO_HEAD requires exactly 2 agents, got {n}")
    if scenario.race_type in ("OBSTACLE_AVOIDANCE", "TIMED_LAP") and n != 1:
        problems.append(f"{scenario.race_type} requires exactly 1 agent, got {n}")
    for i, agent in enumerate(scenario.agents):
        if agent.localization not in LOCALIZATIONS:
            problems.append(f"agent {i}: unknown localization {agent.localization!r}")
        if agent.planner not in PLANNERS:
            problems.append(f"agent {i}: unknown planner {agent.planner!r}")
        if agent.controller not in CONTROLLERS:
            problems.append(f"agent {i}: unknown controller {agent.controller!r}")
        if len(agent.start_pose) != 3:
            problems.append(f"agent {i}: start_pose must be [x, y, theta]")
    if scenario.laps < 1:
        problems.append(f"laps must be >= 1, got {scenario.laps}")
    if scenario.timeout <= 0:
        problems.append(f"timeout must be positive, got {scenario.timeout}")
    if scenario.physics_dt <= 0 or scenario.physics_dt > 0.02:
        problems.append(f"physics_dt must be in (0, 0.02], got {scenario.physics_dt}")

    if problems or not check_world:
        return problems

    try:
        grid = resolve_map(scenario)
        resolve_track(scenario)
    except ScenarioError as exc:
        problems.append(str(exc))
        return problems
    from ..collision import FootprintRect, check_map_collision
    for i, agent in enumerate(scenario.agents):
        params = agent.vehicle_params()
        rect = FootprintRect.from_pose(agent.pose(), params.length, params.width)
        if check_map_collision(grid, rect):
            problems.append(f"agent {i}: start pose {agent.start_pose} is in a wall")
    return problems


def lint_scenario(path) -> list[str]:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return [f"cannot read scenario: {exc}"]
    return lint_scenario_dict(raw)
