"""Infinite-horizon LQR lateral tracking with an in-repo Riccati solver."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NoConvergenceError
from ..geometry import normalize_angle
from ..planning.trajectory import Trajectory
from ..track import polyline_curvature
from ..vehicle import ControlInput, VehicleParams, VehicleState
from .common import rate_command, require_points


def solve_dare(a: np.ndarray, b: np.ndarray, q: np.ndarray, r: np.ndarray,
               tol: float = 1e-12, max_iter: int = 100000):
    """Fixed-point iteration of the discrete algebraic Riccati equation.

    Returns (P, K) with K the optimal feedback gain. Raises NoConvergenceError
    when the iteration fails to settle (e.g. unstabilizable pair).
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if b.shape[0] != a.shape[0]:
        b = b.reshape(a.shape[0], -1)
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = np.atleast_2d(np.asarray(r, dtype=float))

    p = q.copy()
    converged = False
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_iter):
            btp = b.T @ p
            gain_term = np.linalg.solve(r + btp @ b, btp @ a)
            p_next = a.T @ p @ a - (a.T @ p @ b) @ gain_term + q
            if not np.all(np.isfinite(p_next)):
                raise NoConvergenceError("Riccati iteration diverged")
            if np.max(np.abs(p_next - p)) < tol:
                p = p_next
                converged = True
                break
            p = p_next
    if not converged:
        raise NoConvergenceError(f"no DARE fixed point after {max_iter} iterations")
    k = np.linalg.solve(r + b.T @ p @ b, b.T @ p @ a)
    return p, k


@dataclass(frozen=True)
class LqrConfig:
    q_diag: tuple = (1.0, 0.05, 1.2, 0.05)
    r_diag: tuple = (6.0,)
    dt: float = 0.01
    k_speed: float = 2.0
    speed_bucket: float = 0.5   # gain-schedule granularity in m/s


class LqrTracker:
    """Gain-scheduled LQR on the linearized lateral error dynamics.

    Error state z = (e, e_dot, psi_e, psi_e_dot). Gains are solved per
    speed bucket and cached, keeping each tick deterministic and cheap.
    """

    def __init__(self, cfg: LqrConfig, params: VehicleParams):
        self.cfg = cfg
        self.params = params
        self._gains: dict[int, np.ndarray] = {}
        self._hint: int | None = None
        self._prev_e: float | None = None

    def reset(self) -> None:
        self._hint = None
        self._prev_e = None

    def _gain_for(self, v: float) -> np.ndarray:
        bucket = max(int(round(v / self.cfg.speed_bucket)), 1)
        if bucket not in self._gains:
            vb = bucket * self.cfg.speed_bucket
            dt = self.cfg.dt
            a = np.array([[1.0, dt, 0.0, 0.0],
                          [0.0, 0.0, vb, 0.0],
                          [0.0, 0.0, 1.0, dt],
                          [0.0, 0.0, 0.0, 0.0]])
            b = np.array([[0.0], [0.0], [0.0], [vb / self.params.wheelbase_l]])
            q = np.diag(self.cfg.q_diag)
            r = np.diag(self.cfg.r_diag)
            _, k = solve_dare(a, b, q, r, tol=1e-10, max_iter=10000)
            self._gains[bucket] = k
        return self._gains[bucket]

    def control(self, state: VehicleState, trajectory: Trajectory) -> ControlInput:
        require_points(trajectory)
        cfg = self.cfg
        idx, s_proj, d = trajectory.project(state.x, state.y, hint=self._hint)
        self._hint = idx
        _, _, path_theta, v_ref = trajectory.point_at_s(s_proj)
        kappa_ref = self._curvature_at(trajectory, idx)

        e = d  # positive left of path, so e_dot = v sin(psi_e)
        psi_e = normalize_angle(state.theta - path_theta)
        e_dot = state.v * math.sin(psi_e)
        psi_e_dot = state.theta_dot - state.v * kappa_ref

        z = np.array([e, e_dot, psi_e, psi_e_dot])
        k = self._gain_for(max(state.v, cfg.speed_bucket))
        feedback = float(-(k @ z)[0])
        feedforward = math.atan(self.params.wheelbase_l * kappa_ref)
        delta_target = feedforward + feedback
        return rate_command(delta_target, state, self.params, cfg.dt,
                            v_ref, cfg.k_speed)

    @staticmethod
    def _curvature_at(trajectory: Trajectory, idx: int) -> float:
        if "kappa" not in trajectory.__dict__:
            kappa = polyline_curvature(trajectory.xs, trajectory.ys,
                                       trajectory.closed)
            trajectory.__dict__["kappa"] = kappa
        return float(trajectory.__dict__["kappa"][idx])
