"""Equispaced lanes across the track plus the lane-switching policy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..collision import FootprintRect
from ..errors import DomainError
from ..track import Track, frenet_to_cartesian_arrays
from ..vehicle import VehicleParams, VehicleState
from .profile import velocity_profile
from .raceline import min_curvature_raceline
from .trajectory import Trajectory, resample_polyline

LANE_SAMPLE_SPACING = 0.1


@dataclass(frozen=True)
class LaneSet:
    """Fixed-offset lanes spanning the drivable width, plus the raceline."""

    lanes: tuple
    offsets: tuple
    raceline: Trajectory
    lane_spacing: float

    @property
    def n_lanes(self) -> int:
        return len(self.lanes)

    @property
    def center_index(self) -> int:
        return len(self.lanes) // 2


def build_lanes(track: Track, n_lanes: int, vehicle_width: float,
                params: VehicleParams | None = None) -> LaneSet:
    """Lay out n_lanes equispaced lateral-offset lanes (margin = half width).

    n_lanes must be odd (>= 3) so a center lane exists; n_lanes = 1
    degenerates to the centerline. Each lane is resampled to uniform 0.1 m
    spacing and carries a curvature-limited velocity profile.
    """
    if n_lanes != 1 and (n_lanes < 3 or n_lanes % 2 == 0):
        raise DomainError(f"n_lanes must be 1 or odd >= 3, got {n_lanes}")
    params = params or VehicleParams()
    margin = vehicle_width / 2.0
    usable_left = float(track.w_left.min()) - margin
    usable_right = float(track.w_right.min()) - margin
    if usable_left < 0.0 or usable_right < 0.0:
        raise DomainError(
            f"track too narrow for lanes: usable half-widths "
            f"({usable_right:.3f}, {usable_left:.3f}) m")

    if n_lanes == 1:
        offsets = np.array([0.0])
    else:
        offsets = np.linspace(-usable_right, usable_left, n_lanes)

    s_grid = np.arange(0.0, track.total_length, LANE_SAMPLE_SPACING)
    lanes = []
    for d in offsets:
        x, y, _ = frenet_to_cartesian_arrays(track, s_grid, d)
        pts = resample_polyline(x, y, LANE_SAMPLE_SPACING, closed=track.closed)
        v = velocity_profile(pts[:, 0], pts[:, 1], params, closed=track.closed)
        lanes.append(Trajectory.from_points(pts, v, closed=track.closed,
                                            source="lane"))

    if track.closed:
        raceline = min_curvature_raceline(track, vehicle_width, params)
    else:
        raceline = lanes[len(lanes) // 2]
    spacing = float(offsets[1] - offsets[0]) if n_lanes > 1 else \
        usable_left + usable_right
    return LaneSet(lanes=tuple(lanes), offsets=tuple(float(d) for d in offsets),
                   raceline=raceline, lane_spacing=spacing)


@dataclass(frozen=True)
class LaneChoice:
    trajectory: Trajectory
    lane_index: int        # -1 means the raceline
    blocked: bool = False


def lane_switch(lanes: LaneSet, current_lane: int, obstacles, state: VehicleState,
                horizon: float = 5.0, vehicle_width: float = 0.31,
                hints: dict | None = None) -> LaneChoice:
    """Pick the raceline when free, else the nearest free lane by index.

    `obstacles` is either a list of FootprintRect (opponent footprints) or an
    (N, 2) array of world points (e.g. scan endpoints); both are inflated by
    the vehicle width. Index ties resolve to the lower (right) lane. With
    everything blocked the current lane is returned with speed zeroed and
    the blocked flag set. `hints` (lane index -> projection hint, -1 for the
    raceline) makes repeated queries O(1); it is updated in place.
    """
    if _lane_free(lanes.raceline, state, obstacles, horizon, vehicle_width,
                  hints, -1):
        return LaneChoice(_horizon_slice(lanes.raceline, state, horizon,
                                         hints, -1), -1)

    order = sorted(range(lanes.n_lanes),
                   key=lambda i: (abs(i - current_lane), i))
    for i in order:
        if _lane_free(lanes.lanes[i], state, obstacles, horizon, vehicle_width,
                      hints, i):
            return LaneChoice(_horizon_slice(lanes.lanes[i], state, horizon,
                                             hints, i), i)

    stopped = _horizon_slice(lanes.lanes[current_lane], state, horizon,
                             hints, current_lane)
    return LaneChoice(stopped.with_velocity(0.0), current_lane, blocked=True)


def _project_hinted(lane: Trajectory, state: VehicleState,
                    hints: dict | None, key):
    hint = hints.get(key) if hints is not None else None
    idx, s, d = lane.project(state.x, state.y, hint=hint)
    if hints is not None:
        hints[key] = idx
    return s


def _horizon_slice(lane: Trajectory, state: VehicleState, horizon: float,
                   hints: dict | None = None, key=None) -> Trajectory:
    s = _project_hinted(lane, state, hints, key)
    return lane.slice_by_s(s, s + horizon)


def _lane_free(lane: Trajectory, state: VehicleState, obstacles,
               horizon: float, vehicle_width: float,
               hints: dict | None = None, key=None) -> bool:
    sl = _horizon_slice(lane, state, horizon, hints, key)
    pts = sl.as_xy()
    if isinstance(obstacles, np.ndarray):
        if obstacles.size == 0:
            return True
        d2 = ((pts[:, None, :] - obstacles[None, :, :]) ** 2).sum(axis=2)
        return bool(d2.min() > vehicle_width ** 2)
    for rect in obstacles:
        inflated = FootprintRect(rect.cx, rect.cy, rect.heading,
                                 rect.length + vehicle_width,
                                 rect.width + vehicle_width)
        if inflated.contains_points(pts).any():
            return False
    return True
