"""Stanley controller: front-axle cross-track plus heading-error steering."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..geometry import normalize_angle
from ..planning.trajectory import Trajectory
from ..vehicle import ControlInput, VehicleParams, VehicleState
from .common import rate_command, require_points


@dataclass(frozen=True)
class StanleyConfig:
    k_gain: float = 5.0
    k_soft: float = 1.0      # softening speed in the atan denominator
    k_speed: float = 2.0
    dt: float = 0.01


def stanley(state: VehicleState, trajectory: Trajectory, cfg: StanleyConfig,
            params: VehicleParams, hint: int | None = None
            ) -> tuple[ControlInput, int]:
    """One control step; returns the command and the projection hint.

    delta = psi_e + atan(k e / (v + k_soft)) with e the signed cross-track
    error at the front axle, positive when the path lies to the vehicle's
    left (steering toward it is then positive).
    """
    require_points(trajectory)
    fx = state.x + params.lf * math.cos(state.theta)
    fy = state.y + params.lf * math.sin(state.theta)
    idx, s_proj, d = trajectory.project(fx, fy, hint=hint)
    _, _, path_theta, v_ref = trajectory.point_at_s(s_proj)

    psi_e = normalize_angle(path_theta - state.theta)
    e = -d  # vehicle left of path (d > 0) -> steer right (negative)
    delta_target = psi_e + math.atan(cfg.k_gain * e / (state.v + cfg.k_soft))
    return rate_command(delta_target, state, params, cfg.dt, v_ref,
                        cfg.k_speed), idx


class StanleyTracker:
    """Stateful wrapper carrying the projection hint between ticks."""

    def __init__(self, cfg: StanleyConfig, params: VehicleParams):
        self.cfg = cfg
        self.params = params
        self._hint: int | None = None

    def reset(self) -> None:
        self._hint = None

    def control(self, state: VehicleState, trajectory: Trajectory) -> ControlInput:
        command, self._hint = stanley(state, trajectory, self.cfg, self.params,
                                      hint=self._hint)
        return command
