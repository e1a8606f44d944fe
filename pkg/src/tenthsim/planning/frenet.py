"""Semi-reactive Frenet-frame planner: quintic lateral / quartic longitudinal
candidate trajectories over a lattice of goal offsets and horizons, selected
by cost after feasibility and collision filtering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..collision import FootprintRect, check_map_collision, check_obb_collision
from ..gridmap import OccupancyGridMap
from ..track import (Track, cartesian_to_frenet, frenet_to_cartesian_arrays,
                     polyline_curvature, track_pose_at)
from ..geometry import normalize_angle
from ..vehicle import VehicleParams, VehicleState
from .trajectory import Trajectory


class QuinticPolynomial:
    """Degree-5 polynomial fixed by position/velocity/acceleration at 0 and T."""

    def __init__(self, x0, v0, a0, xt, vt, at, t_end):
        self.a0 = x0
        self.a1 = v0
        self.a2 = a0 / 2.0
        t = t_end
        b0 = xt - self.a0 - self.a1 * t - self.a2 * t * t
        b1 = vt - self.a1 - 2 * self.a2 * t
        b2 = at - 2 * self.a2
        # closed-form inverse of the boundary system (cheaper than linalg)
        t2, t3, t4, t5 = t * t, t ** 3, t ** 4, t ** 5
        self.a3 = (10 * b0 - 4 * b1 * t + 0.5 * b2 * t2) / t3
        self.a4 = (-15 * b0 + 7 * b1 * t - b2 * t2) / t4
        self.a5 = (6 * b0 - 3 * b1 * t + 0.5 * b2 * t2) / t5

    def value(self, t):
        return (self.a0 + self.a1 * t + self.a2 * t ** 2 + self.a3 * t ** 3
                + self.a4 * t ** 4 + self.a5 * t ** 5)

    def deriv1(self, t):
        return (self.a1 + 2 * self.a2 * t + 3 * self.a3 * t ** 2
                + 4 * self.a4 * t ** 3 + 5 * self.a5 * t ** 4)

    def deriv2(self, t):
        return 2 * self.a2 + 6 * self.a3 * t + 12 * self.a4 * t ** 2 + 20 * self.a5 * t ** 3

    def deriv3(self, t):
        return 6 * self.a3 + 24 * self.a4 * t + 60 * self.a5 * t ** 2

    def jerk_squared_integral(self, t_end) -> float:
        """Closed-form integral of the squared third derivative over [0, T]."""
        a3, a4, a5 = self.a3, self.a4, self.a5
        t = t_end
        return (36.0 * a3 ** 2 * t
                + 144.0 * a3 * a4 * t ** 2
                + (192.0 * a4 ** 2 + 240.0 * a3 * a5) * t ** 3
                + 720.0 * a4 * a5 * t ** 4
                + 720.0 * a5 ** 2 * t ** 5)


class QuarticPolynomial:
    """Degree-4 polynomial: position/velocity/acceleration at 0, velocity and
    acceleration at T (terminal position free)."""

    def __init__(self, x0, v0, a0, vt, at, t_end):
        self.a0 = x0
        self.a1 = v0
        self.a2 = a0 / 2.0
        t = t_end
        b1 = vt - self.a1 - 2 * self.a2 * t
        b2 = at - 2 * self.a2
        self.a3 = (3.0 * b1 - b2 * t) / (3.0 * t * t)
        self.a4 = (b2 * t - 2.0 * b1) / (4.0 * t ** 3)

    def value(self, t):
        return self.a0 + self.a1 * t + self.a2 * t ** 2 + self.a3 * t ** 3 + self.a4 * t ** 4

    def deriv1(self, t):
        return self.a1 + 2 * self.a2 * t + 3 * self.a3 * t ** 2 + 4 * self.a4 * t ** 3


@dataclass(frozen=True)
class FrenetConfig:
    n_goal_offsets: int = 7
    horizons: tuple = (1.0, 1.5, 2.0)
    target_speed: float = 4.0
    sample_dt: float = 0.05
    margin: float = 0.155          # lateral clearance off the walls
    k_jerk: float = 0.1
    k_time: float = 0.1
    k_lateral: float = 1.0
    k_speed: float = 0.5
    sweep_step: float = 0.1        # collision sweep spacing along candidates


def frenet_candidates(state: VehicleState, track: Track,
                      params: VehicleParams,
                      cfg: FrenetConfig = FrenetConfig()) -> list[Trajectory]:
    """Candidate trajectories for every (goal offset, horizon) pair.

    Lateral motion is a quintic from the current (d, d_dot, 0) to (d_f, 0, 0);
    longitudinal is a quartic toward the target speed. Each candidate carries
    cost = k_j * integral(jerk^2) + k_t * T + k_d * d_f^2 + k_v * dv^2.
    """
    s0, d0 = cartesian_to_frenet(track, (state.x, state.y))
    psi_e = normalize_angle(state.theta - track_pose_at(track, s0).theta)
    d_dot0 = state.v * math.sin(psi_e)
    s_dot0 = max(state.v * math.cos(psi_e), 0.0)

    usable_left = float(track.w_left.min()) - cfg.margin
    usable_right = float(track.w_right.min()) - cfg.margin
    goals = np.linspace(-usable_right, usable_left, cfg.n_goal_offsets)

    candidates = []
    for t_end in cfg.horizons:
        lon = QuarticPolynomial(s0, s_dot0, 0.0, cfg.target_speed, 0.0, t_end)
        ts = np.arange(0.0, t_end + cfg.sample_dt / 2.0, cfg.sample_dt)
        ss = lon.value(ts)
        v_end = float(lon.deriv1(t_end))
        lats = [QuinticPolynomial(d0, d_dot0, 0.0, float(d_f), 0.0, 0.0, t_end)
                for d_f in goals]
        # one batched Frenet->Cartesian conversion for all goals of this horizon
        ds_all = np.stack([lat.value(ts) for lat in lats])
        x_all, y_all, _ = frenet_to_cartesian_arrays(
            track, np.tile(ss, len(lats)), ds_all.ravel())
        x_all = x_all.reshape(len(lats), -1)
        y_all = y_all.reshape(len(lats), -1)
        for lat, d_f, x, y in zip(lats, goals, x_all, y_all):
            seg = np.hypot(np.diff(x), np.diff(y))
            arc = np.concatenate([[0.0], np.cumsum(seg)])
            thetas = _segment_headings(x, y, seg, fallback=state.theta)
            vs = np.empty(ts.size)
            vs[1:] = seg / cfg.sample_dt
            vs[0] = state.v
            cost = (cfg.k_jerk * lat.jerk_squared_integral(t_end)
                    + cfg.k_time * t_end
                    + cfg.k_lateral * float(d_f) ** 2
                    + cfg.k_speed * (v_end - cfg.target_speed) ** 2)
            candidates.append(Trajectory(
                xs=x, ys=y, thetas=thetas, vs=np.abs(vs), ss=arc,
                source="frenet", cost=cost))
    return candidates


def frenet_select(candidates: list[Trajectory], grid: OccupancyGridMap | None,
                  opponents, params: VehicleParams,
                  cfg: FrenetConfig = FrenetConfig()) -> Trajectory:
    """Cheapest feasible candidate; collision sweeps the footprint at 0.1 m.

    Candidates violating the curvature or speed limits are discarded. When
    nothing survives, the lowest-lateral-cost candidate is returned as a
    braking fallback flagged INFEASIBLE.
    """
    if not candidates:
        raise ValueError("need at least one candidate")
    order = sorted(range(len(candidates)), key=lambda i: candidates[i].cost)
    for i in order:
        cand = candidates[i]
        if cand.vs.max() > params.v_max + 1e-9:
            continue
        if _max_curvature(cand) > params.kappa_max + 1e-9:
            continue
        if _swept_collision(cand, grid, opponents, params, cfg.sweep_step):
            continue
        return cand

    fallback = min(candidates, key=lambda c: abs(c.ys[-1] - c.ys[0]) + c.cost)
    n = fallback.n_points
    decel = np.maximum(fallback.vs[0] ** 2 - 2.0 * params.a_max * fallback.ss, 0.0)
    return Trajectory(xs=fallback.xs, ys=fallback.ys, thetas=fallback.thetas,
                      vs=np.sqrt(decel), ss=fallback.ss, source="frenet",
                      flag="INFEASIBLE", cost=fallback.cost)


def _segment_headings(x, y, seg, fallback: float) -> np.ndarray:
    """Per-point headings from segment directions; zero-length segments
    inherit the previous heading (slow starts sample nearly coincident
    points, whose atan2 would be noise)."""
    thetas = np.full(x.size, fallback)
    good = seg > 1e-9
    raw = np.arctan2(np.diff(y), np.diff(x))
    last = fallback
    for i in range(x.size - 1):
        if good[i]:
            last = raw[i]
        thetas[i] = last
    thetas[-1] = last
    return thetas


def _max_curvature(cand: Trajectory) -> float:
    """Peak |curvature| measured on a 0.15 m resampling of the candidate.

    The raw samples are time-spaced and nearly coincide at low speed, where
    discrete curvature is pure noise.
    """
    from .trajectory import resample_polyline

    if cand.length < 0.5:
        return 0.0
    pts = resample_polyline(cand.xs, cand.ys, 0.15)
    if pts.shape[0] < 5:
        return 0.0
    kappa = polyline_curvature(pts[:, 0], pts[:, 1], closed=False)
    return float(np.abs(kappa[1:-1]).max())


def _swept_collision(cand: Trajectory, grid: OccupancyGridMap | None,
                     opponents, params: VehicleParams, step: float) -> bool:
    s_checks = np.arange(0.0, cand.ss[-1] + step / 2.0, step)
    idx = np.clip(np.searchsorted(cand.ss, s_checks), 0, cand.n_points - 1)
    for i in np.unique(idx):
        rect = FootprintRect(cand.xs[i], cand.ys[i], cand.thetas[i],
                             params.length, params.width)
        if grid is not None and check_map_collision(grid, rect):
            return True
        for opp in opponents:
            if check_obb_collision(rect, opp):
                return True
    return False
