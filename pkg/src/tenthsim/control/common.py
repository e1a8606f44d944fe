"""Shared helpers for converting target steering angles into plant inputs."""

from __future__ import annotations

import numpy as np

from ..errors import EmptyTrajectoryError
from ..planning.trajectory import Trajectory
from ..vehicle import ControlInput, VehicleParams, VehicleState


def require_points(trajectory: Trajectory) -> None:
    if trajectory is None or trajectory.n_points == 0:
        raise EmptyTrajectoryError("controller needs a non-empty trajectory")


def rate_command(delta_target: float, state: VehicleState,
                 params: VehicleParams, dt: float, v_ref: float,
                 k_speed: float) -> ControlInput:
    """Steering-angle target -> (steer_rate, accel) within actuator limits."""
    delta_target = min(max(delta_target, -params.delta_max), params.delta_max)
    steer_rate = (delta_target - state.delta) / dt
    accel = k_speed * (v_ref - state.v)
    return ControlInput(steer_rate=steer_rate, accel=accel).clamped(params)
