"""Per-agent autonomy pipelines: localization source, planner, controller.

One pipeline owns all per-agent stack state (particle filter, lane index,
warm starts) and turns an engine observation into a ControlInput each tick
in the fixed order localize -> plan -> control, with the AEB veto applied
last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..collision import FootprintRect
from ..engine import AgentObs
from ..errors import ScenarioError
from ..geometry import Pose2D
from ..gridmap import OccupancyGridMap
from ..localization import (GaussianAround, build_likelihood_field, pf_init,
                            pf_update)
from ..planning import (FrenetConfig, GapFollowerConfig, LatticeConfig,
                        aeb_should_brake, build_lanes, build_lattice_graph,
                        follow_the_gap, frenet_candidates, frenet_select,
                        graph_plan, lane_switch)
from ..planning.lattice import OpponentTrack
from ..planning.trajectory import Trajectory
from ..track import Track, cartesian_to_frenet
from ..vehicle import ControlInput, VehicleState
from ..control import (LqrConfig, LqrTracker, MpcConfig, MpcTracker,
                       PurePursuitConfig, PurePursuitTracker, StanleyConfig,
                       StanleyTracker)
from .scenario import AgentSpec, Scenario

# The emergency-braking veto only looks at a narrow forward cone: oblique
# beams grazing a near wall read as tiny per-beam time-to-collision even when
# the car is driving parallel to it, which would forbid racing close to walls.
AEB_THRESHOLD_S = 0.3
AEB_CONE_HALF_ANGLE = 0.26      # ~15 degrees
# The gap follower only considers a forward sector; with the full 270 degree
# scan the widest gap on an open track is often behind and the car U-turns.
# Clipping depth low makes deep beams tie so the tie-break steers at gap
# centers instead of grazing obstacle edges.
GAP_CONE_HALF_ANGLE = 1.4       # ~80 degrees
GAP_CONFIG_OVERRIDES = dict(max_clip=6.0, bubble_radius=0.4, free_threshold=1.2)
# Lanes and graph edges are laid out as if the car were wider than it is,
# so planned paths keep real clearance off the walls under tracking error.
SAFETY_CLEARANCE = 0.15


@dataclass
class SharedWorld:
    """Per-scenario immutable assets shared by all pipelines."""

    grid: OccupancyGridMap
    track: Track
    lanes: object | None = None
    graph: object | None = None
    lfield: object | None = None


class AgentPipeline:
    """localize -> plan -> control for one agent."""

    def __init__(self, index: int, spec: AgentSpec, scenario: Scenario,
                 world: SharedWorld):
        self.index = index
        self.spec = spec
        self.scenario = scenario
        self.world = world
        self.params = spec.vehicle_params()
        self.scan_spec = spec.scan_spec()
        self.plan_every = scenario.plan_every
        self._tick = 0
        self._trajectory: Trajectory | None = None
        self._gap_cmd = None
        self._lane_index = world.lanes.center_index if world.lanes else 0
        self._controller = self._make_controller()
        self._lane_hints: dict = {}
        self.mpc_prediction = None     # latest predicted horizon, for the logs
        self._pf = None
        self._pf_estimate: Pose2D | None = None
        self._prev_gt: Pose2D | None = None
        self.aeb_active = False
        self.degraded = False

    def _make_controller(self):
        name = self.spec.controller
        if name == "PURE_PURSUIT":
            return PurePursuitTracker(PurePursuitConfig(), self.params)
        if name == "STANLEY":
            return StanleyTracker(StanleyConfig(), self.params)
        if name == "LQR":
            return LqrTracker(LqrConfig(), self.params)
        if name == "MPC":
            return MpcTracker(MpcConfig(), self.params)
        raise ScenarioError(f"unknown controller {name!r}")

    # ------------------------------------------------------------------

    def localize(self, obs: AgentObs) -> Pose2D:
        loc = self.spec.localization
        if loc == "GROUND_TRUTH":
            return obs.pose
        if loc == "GPS":
            return obs.gps
        if loc == "PARTICLE_FILTER":
            return self._particle_filter(obs)
        raise ScenarioError(f"unknown localization {loc!r}")

    def _particle_filter(self, obs: AgentObs) -> Pose2D:
        scn = self.scenario
        if self._pf is None:
            self._pf = pf_init(self.world.grid, scn.pf_particles,
                               seed=scn.seed * 7919 + self.index,
                               prior=GaussianAround(obs.pose, 0.2, 0.1))
            self._pf_estimate = obs.pose
            self._prev_gt = obs.pose
            self._odom_acc = Pose2D(0.0, 0.0, 0.0)
            return obs.pose
        # body-frame odometry from ground truth (simulated wheel odometry)
        prev = self._prev_gt
        dx = obs.pose.x - prev.x
        dy = obs.pose.y - prev.y
        c, s = math.cos(prev.theta), math.sin(prev.theta)
        odom = Pose2D(c * dx + s * dy, -s * dx + c * dy,
                      obs.pose.theta - prev.theta)
        self._prev_gt = obs.pose
        # particles only move at update ticks, so motion accumulates between
        self._odom_acc = self._odom_acc.compose(odom)

        if self._tick % scn.pf_every == 0:
            self._pf, est, _ = pf_update(self._pf, self._odom_acc, obs.scan,
                                         self.world.lfield, self.scan_spec)
            self._pf_estimate = est
            self._odom_acc = Pose2D(0.0, 0.0, 0.0)
        else:
            prev_est = self._pf_estimate
            ce, se = math.cos(prev_est.theta), math.sin(prev_est.theta)
            self._pf_estimate = Pose2D(
                prev_est.x + ce * odom.x - se * odom.y,
                prev_est.y + se * odom.x + ce * odom.y,
                prev_est.theta + odom.theta)
        return self._pf_estimate

    # ------------------------------------------------------------------

    def plan(self, estimate: Pose2D, obs: AgentObs, opponents) -> None:
        if self._tick % self.plan_every != 0 and self._trajectory is not None:
            return
        planner = self.spec.planner
        state = self._estimate_state(estimate, obs)
        if planner == "GAP":
            self._gap_cmd = follow_the_gap(
                _forward_cone(obs.scan, GAP_CONE_HALF_ANGLE),
                GapFollowerConfig(v_straight=self.spec.target_speed,
                                  max_steer=self.params.delta_max,
                                  **GAP_CONFIG_OVERRIDES))
            return
        if planner == "LANE_SWITCH":
            choice = lane_switch(self.world.lanes, self._lane_index,
                                 [o.footprint for o in opponents], state,
                                 vehicle_width=self.params.width,
                                 hints=self._lane_hints)
            if choice.lane_index >= 0:
                self._lane_index = choice.lane_index
            self._trajectory = self._cap_speed(choice.trajectory)
            return
        if planner == "FRENET":
            cfg = FrenetConfig(target_speed=self.spec.target_speed,
                               margin=self.params.width / 2.0 + SAFETY_CLEARANCE)
            cands = frenet_candidates(state, self.world.track, self.params, cfg)
            self._trajectory = frenet_select(
                cands, self.world.grid, [o.footprint for o in opponents],
                self.params, cfg)
            return
        if planner == "GRAPH":
            opp = [OpponentTrack(o.s, o.d, o.v) for o in opponents]
            self._trajectory = self._cap_speed(
                graph_plan(self.world.graph, state, opp, params=self.params))
            return
        raise ScenarioError(f"unknown planner {planner!r}")

    def control(self, estimate: Pose2D, obs: AgentObs) -> ControlInput:
        state = self._estimate_state(estimate, obs)
        if self.spec.idle:
            command = ControlInput(0.0, 0.0)
        elif self.spec.planner == "GAP":
            cmd = self._gap_cmd
            if cmd is None or cmd.no_gap:
                command = ControlInput(0.0, -self.params.a_max)
            else:
                steer_rate = (cmd.steer - state.delta) / 0.05
                accel = 2.0 * (cmd.speed - state.v)
                command = ControlInput(steer_rate, accel).clamped(self.params)
        elif isinstance(self._controller, MpcTracker):
            solution = self._controller.solve(state, self._trajectory)
            self.mpc_prediction = solution.predicted
            command = solution.command
            if self._controller.degraded:
                self.degraded = True
        else:
            command = self._controller.control(state, self._trajectory)

        self.aeb_active = (not self.spec.idle) and aeb_should_brake(
            _forward_cone(obs.scan, AEB_CONE_HALF_ANGLE), obs.v, AEB_THRESHOLD_S)
        if self.aeb_active:
            command = ControlInput(command.steer_rate,
                                   -self.params.a_max).clamped(self.params)
        return command

    def step(self, obs: AgentObs, opponents) -> tuple[ControlInput, Pose2D]:
        """One full pipeline tick; returns the command and the pose estimate."""
        estimate = self.localize(obs)
        if not self.spec.idle:
            self.plan(estimate, obs, opponents)
        command = self.control(estimate, obs)
        self._tick += 1
        return command, estimate

    def _cap_speed(self, trajectory: Trajectory) -> Trajectory:
        """Scenario target_speed acts as a hard cap on planned velocities."""
        return trajectory.with_velocity(
            np.minimum(trajectory.vs, self.spec.target_speed))

    def _estimate_state(self, estimate: Pose2D, obs: AgentObs) -> VehicleState:
        return VehicleState(x=estimate.x, y=estimate.y, delta=obs.delta,
                            v=obs.v, theta=estimate.theta,
                            theta_dot=obs.theta_dot, beta=obs.beta)

    @property
    def trajectory(self) -> Trajectory | None:
        return self._trajectory


_CONE_CACHE: dict = {}


def _forward_cone(scan, half_angle: float):
    """Slice of a scan limited to beams within +-half_angle of straight ahead."""
    from ..sensing import LaserScan

    key = (scan.num_beams, scan.fov, half_angle)
    cached = _CONE_CACHE.get(key)
    if cached is None:
        angles = np.linspace(-scan.fov / 2.0, scan.fov / 2.0, scan.num_beams)
        keep = np.abs(angles) <= half_angle
        idx = np.nonzero(keep)[0]
        sub = angles[keep]
        cached = (idx, float(sub[-1] - sub[0]) if idx.size else 0.0,
                  bool(keep.all()))
        _CONE_CACHE[key] = cached
    idx, fov, full = cached
    if full:
        return scan
    return LaserScan(ranges=scan.ranges[idx], fov=fov, timestamp=scan.timestamp)


@dataclass(frozen=True)
class OpponentView:
    """What one agent is allowed to know about another."""

    footprint: FootprintRect
    s: float
    d: float
    v: float


class OpponentTracker:
    """Computes every agent's Frenet position once per tick, hinted."""

    def __init__(self, track: Track, params_list):
        self.track = track
        self.params_list = params_list
        self._hints: list[float | None] = [None] * len(params_list)
        self._views: list[OpponentView] = []

    def update(self, observations) -> None:
        views = []
        for j, obs in enumerate(observations):
            s, d = cartesian_to_frenet(self.track, (obs.pose.x, obs.pose.y),
                                       s_hint=self._hints[j])
            self._hints[j] = s
            p = self.params_list[j]
            views.append(OpponentView(
                footprint=FootprintRect.from_pose(obs.pose, p.length, p.width),
                s=s, d=d, v=obs.v))
        self._views = views

    def views_excluding(self, exclude: int) -> list[OpponentView]:
        return [v for j, v in enumerate(self._views) if j != exclude]


def opponent_views(track: Track, observations, params_list,
                   exclude: int) -> list[OpponentView]:
    views = []
    for j, obs in enumerate(observations):
        if j == exclude:
            continue
        p = params_list[j]
        rect = FootprintRect.from_pose(obs.pose, p.length, p.width)
        s, d = cartesian_to_frenet(track, (obs.pose.x, obs.pose.y))
        views.append(OpponentView(footprint=rect, s=s, d=d, v=obs.v))
    return views


def build_world(scenario: Scenario, grid: OccupancyGridMap,
                track: Track) -> SharedWorld:
    """Construct the shared lanes/graph/likelihood-field assets on demand."""
    world = SharedWorld(grid=grid, track=track)
    planners = {a.planner for a in scenario.agents}
    widths = [a.vehicle_params().width for a in scenario.agents]
    planning_width = max(widths) + 2.0 * SAFETY_CLEARANCE
    if "LANE_SWITCH" in planners:
        world.lanes = build_lanes(track, scenario.n_lanes, planning_width)
    if "GRAPH" in planners:
        world.graph = build_lattice_graph(
            track, scenario.agents[0].vehicle_params(),
            LatticeConfig(n_lanes=scenario.n_lanes,
                          vehicle_width=planning_width), grid=grid)
    if any(a.localization == "PARTICLE_FILTER" for a in scenario.agents):
        world.lfield = build_likelihood_field(grid)
    return world
