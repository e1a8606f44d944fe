"""Episodic environment wrapper over the tenthsim engine.

The handle owns exactly one engine; all episode state lives engine-side, so
snapshots taken through the binding round-trip unchanged. Rewards come from
the scenario's reward spec — the binding adds no logic of its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

import tenthsim
from tenthsim import ControlInput, RewardSpec
from tenthsim.engine import StepResult
from tenthsim.errors import SteppedAfterDoneError, TenthSimError
from tenthsim.harness import load_scenario
from tenthsim.harness.race import build_engine
from tenthsim.harness.scenario import Scenario, scenario_from_dict

ENGINE_VERSION = "0.1.0"


class ClosedHandleError(TenthSimError):
    """Operation on a handle whose engine has been closed."""


@dataclass(frozen=True)
class SpaceSpec:
    """Array-shape and bound descriptors for observations and actions."""

    n_agents: int
    scan_beams: tuple
    action_low: np.ndarray = field(repr=False)
    action_high: np.ndarray = field(repr=False)

    @property
    def action_shape(self) -> tuple:
        return (self.n_agents, 2)


@dataclass(frozen=True)
class AgentObservation:
    scan: np.ndarray
    pose: np.ndarray          # x, y, theta
    velocity: float
    yaw_rate: float
    steering: float
    collision: bool
    collision_with: str
    lap_count: int


@dataclass(frozen=True)
class Observation:
    agents: tuple
    sim_time: float


class RaceEnv:
    """Episodic reset/step handle over one engine instance."""

    def __init__(self, scenario: Scenario, reward: RewardSpec | None = None):
        if tenthsim.__version__ != ENGINE_VERSION:
            raise TenthSimError(
                f"binding built for engine {ENGINE_VERSION}, found "
                f"{tenthsim.__version__}")
        self.scenario = scenario
        self.reward_spec = reward or RewardSpec()
        self._engine, self._grid, self._track = build_engine(scenario)
        self._closed = False
        self._started = False

        agents = self._engine.config.agents
        low = np.array([[-a.params.steer_rate_max, -a.params.a_max]
                        for a in agents])
        high = -low
        self.spaces = SpaceSpec(
            n_agents=len(agents),
            scan_beams=tuple(a.scan_spec.num_beams for a in agents),
            action_low=low,
            action_high=high,
        )

    # ------------------------------------------------------------------

    def reset(self, seed: int | None = None, poses=None) -> Observation:
        """Start a fresh episode; optional seed and start-pose overrides."""
        self._check_open()
        if seed is not None or poses is not None:
            raw = dict(self.scenario.raw)
            if seed is not None:
                raw["seed"] = seed
            if poses is not None:
                raw = dict(raw)
                raw["agents"] = [dict(a) for a in raw["agents"]]
                for spec, pose in zip(raw["agents"], poses):
                    spec["start_pose"] = list(pose)
            self.scenario = scenario_from_dict(raw)
            self._engine, self._grid, self._track = build_engine(self.scenario)
        result = self._engine.reset()
        self._started = True
        return _observation(result)

    def step(self, actions):
        """Apply one action per agent; returns (obs, rewards, terminated,
        truncated, info). Out-of-bounds actions are clipped and reported in
        info["clipped"]."""
        self._check_open()
        if not self._started:
            raise SteppedAfterDoneError("call reset() before step()")
        acts = np.asarray(actions, dtype=float).reshape(self.spaces.action_shape)
        clipped = np.clip(acts, self.spaces.action_low, self.spaces.action_high)
        was_clipped = bool((clipped != acts).any())

        # pre-step bookkeeping comes from engine counters (not observations),
        # so restoring a snapshot never has to re-observe and burn rng
        n = self.spaces.n_agents
        prev_time = self._engine.sim_time
        prev_collided = [self._engine.collided(i) for i in range(n)]
        prev_laps = [self._engine.lap_count(i) for i in range(n)]

        result = self._engine.step([ControlInput(sr, a) for sr, a in clipped])

        dt = result.sim_time - prev_time
        rewards = np.array([
            self.reward_spec.step_reward(
                dt,
                newly_collided=result.agents[i].collision
                and not prev_collided[i],
                laps_completed=result.agents[i].lap_count - prev_laps[i],
                done=result.done,
            )
            for i in range(n)
        ])
        terminated = result.done and (
            all(a.collision for a in result.agents)
            or max(a.lap_count for a in result.agents)
            >= (self.scenario.laps or 0))
        truncated = result.done and not terminated
        info = {"clipped": was_clipped, "sim_time": result.sim_time}
        return _observation(result), rewards, terminated, truncated, info

    # ------------------------------------------------------------------

    def save_state(self) -> bytes:
        self._check_open()
        return self._engine.save_state()

    def load_state(self, blob: bytes) -> None:
        """Restore a snapshot in place. Consumes no randomness, so stepping
        after a load continues the original run bit for bit."""
        self._check_open()
        self._engine.load_state(blob)
        self._started = True

    def close(self) -> None:
        self._closed = True

    @property
    def version(self) -> str:
        return ENGINE_VERSION

    def _check_open(self) -> None:
        if self._closed:
            raise ClosedHandleError("environment handle is closed")


def _observation(result: StepResult) -> Observation:
    agents = tuple(
        AgentObservation(
            scan=a.scan.ranges,
            pose=np.array([a.pose.x, a.pose.y, a.pose.theta]),
            velocity=a.v,
            yaw_rate=a.theta_dot,
            steering=a.delta,
            collision=a.collision,
            collision_with=a.collision_with,
            lap_count=a.lap_count,
        )
        for a in result.agents)
    return Observation(agents=agents, sim_time=result.sim_time)


def make(scenario_path, reward: RewardSpec | None = None) -> RaceEnv:
    """Open an environment handle for a scenario file."""
    return RaceEnv(load_scenario(scenario_path), reward=reward)
