"""Pure pursuit: geometric tracking of a look-ahead point on the path."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..planning.trajectory import Trajectory
from ..vehicle import ControlInput, VehicleParams, VehicleState
from .common import rate_command, require_points


@dataclass(frozen=True)
class PurePursuitConfig:
    lookahead_base: float = 0.8
    lookahead_speed_gain: float = 0.2   # L_d = base + gain * v
    lookahead_min: float = 0.5
    lookahead_max: float = 3.0
    k_speed: float = 2.0
    dt: float = 0.01                    # control period for the rate conversion


def pure_pursuit(state: VehicleState, trajectory: Trajectory,
                 cfg: PurePursuitConfig, params: VehicleParams,
                 hint: int | None = None) -> tuple[ControlInput, int]:
    """One control step; returns the command and the projection hint.

    The target is the first path point at least L_d arc-meters ahead of the
    rear axle's projection; curvature gamma = 2 y_L / L_d^2 in the rear-axle
    frame gives the steering target atan(gamma * wheelbase).
    """
    require_points(trajectory)
    ld = float(np.clip(cfg.lookahead_base + cfg.lookahead_speed_gain * state.v,
                       cfg.lookahead_min, cfg.lookahead_max))
    rx = state.x - params.lr * math.cos(state.theta)
    ry = state.y - params.lr * math.sin(state.theta)
    idx, s_proj, _ = trajectory.project(rx, ry, hint=hint)
    tx, ty, _, v_ref = trajectory.point_at_s(s_proj + ld)

    # target point in the rear-axle frame
    dx = tx - rx
    dy = ty - ry
    c, s = math.cos(state.theta), math.sin(state.theta)
    y_l = -s * dx + c * dy
    gamma = 2.0 * y_l / (ld * ld)
    delta_target = math.atan(gamma * params.wheelbase_l)
    return rate_command(delta_target, state, params, cfg.dt, v_ref,
                        cfg.k_speed), idx


class PurePursuitTracker:
    """Stateful wrapper carrying the projection hint between ticks."""

    def __init__(self, cfg: PurePursuitConfig, params: VehicleParams):
        self.cfg = cfg
        self.params = params
        self._hint: int | None = None

    def reset(self) -> None:
        self._hint = None

    def control(self, state: VehicleState, trajectory: Trajectory) -> ControlInput:
        command, self._hint = pure_pursuit(state, trajectory, self.cfg,
                                           self.params, hint=self._hint)
        return command
