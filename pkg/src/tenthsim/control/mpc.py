"""Linear time-varying MPC on the kinematic model, condensed to an input QP.

The model state is (x, y, v, yaw) and inputs are (accel, steering angle);
each tick linearizes about the reference, condenses the horizon into a dense
QP over the input sequence, and solves it with the in-repo ADMM solver. The
first input is converted to the plant's (steer_rate, accel) pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyTrajectoryError
from ..geometry import normalize_angle
from ..planning.trajectory import Trajectory
from ..qpsolver import QpResult, solve_qp
from ..track import polyline_curvature
from ..vehicle import ControlInput, VehicleParams, VehicleState

NZ = 4  # model state dimension
NU = 2  # inputs: (accel, steering angle)


@dataclass(frozen=True)
class MpcConfig:
    horizon: int = 10
    dt: float = 0.05
    q_diag: tuple = (8.0, 8.0, 1.0, 2.0)
    qf_diag: tuple = (8.0, 8.0, 1.0, 2.0)
    r_diag: tuple = (0.05, 1.0)
    v_min: float = 0.0
    v_max: float | None = None       # None: use the vehicle's limit
    tol: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError("horizon must be >= 2")


@dataclass
class MpcSolution:
    command: ControlInput
    inputs: np.ndarray            # (N, 2) planned (accel, delta)
    predicted: np.ndarray         # (N+1, 4) predicted states
    converged: bool
    iterations: int
    objective_trace: list


class MpcTracker:
    """Receding-horizon tracker; warm-starts from the previous solution."""

    def __init__(self, cfg: MpcConfig, params: VehicleParams):
        self.cfg = cfg
        self.params = params
        self._hint: int | None = None
        self._warm: QpResult | None = None
        self.degraded = False     # latched when the solver hits max_iter
        self.last_qp = None       # (H, g) of the latest condensed QP

    def reset(self) -> None:
        self._hint = None
        self._warm = None
        self.degraded = False

    def control(self, state: VehicleState, trajectory: Trajectory) -> ControlInput:
        return self.solve(state, trajectory).command

    def solve(self, state: VehicleState, trajectory: Trajectory) -> MpcSolution:
        if trajectory is None or trajectory.n_points == 0:
            raise EmptyTrajectoryError("MPC needs a non-empty trajectory")
        cfg = self.cfg
        params = self.params
        n = cfg.horizon

        z_ref, delta_ref = self._reference(state, trajectory)
        z0 = np.array([state.x, state.y, state.v, z_ref[0, 3]
                       + normalize_angle(state.theta - z_ref[0, 3])])

        # LTV matrices along the reference
        a_seq = np.empty((n, NZ, NZ))
        b_seq = np.empty((n, NZ, NU))
        c_seq = np.empty((n, NZ))
        dt = cfg.dt
        wl = params.wheelbase_l
        for k in range(n):
            vr = max(z_ref[k, 2], 0.3)
            yr = z_ref[k, 3]
            dr = delta_ref[k]
            cos_y, sin_y = math.cos(yr), math.sin(yr)
            cos_d2 = math.cos(dr) ** 2
            a = np.eye(NZ)
            a[0, 2] = dt * cos_y
            a[0, 3] = -dt * vr * sin_y
            a[1, 2] = dt * sin_y
            a[1, 3] = dt * vr * cos_y
            a[3, 2] = dt * math.tan(dr) / wl
            b = np.zeros((NZ, NU))
            b[2, 0] = dt
            b[3, 1] = dt * vr / (wl * cos_d2)
            c = np.array([dt * vr * sin_y * yr,
                          -dt * vr * cos_y * yr,
                          0.0,
                          -dt * vr * dr / (wl * cos_d2)])
            a_seq[k] = a
            b_seq[k] = b
            c_seq[k] = c

        # condense: z = Phi z0 + Gamma u + d
        phi = np.empty((n, NZ, NZ))
        d_vec = np.empty((n, NZ))
        running = np.eye(NZ)
        offset = np.zeros(NZ)
        for k in range(n):
            offset = a_seq[k] @ offset + c_seq[k]
            running = a_seq[k] @ running
            phi[k] = running
            d_vec[k] = offset
        gamma = np.zeros((n, NZ, n, NU))
        for k in range(n):
            block = b_seq[k].copy()
            gamma[k, :, k, :] = block
            for k2 in range(k + 1, n):
                block = a_seq[k2] @ block
                gamma[k2, :, k, :] = block
        gamma_flat = gamma.reshape(n * NZ, n * NU)

        q_blocks = [np.diag(cfg.q_diag)] * (n - 1) + [np.diag(cfg.qf_diag)]
        q_bar = np.zeros((n * NZ, n * NZ))
        for k in range(n):
            q_bar[k * NZ:(k + 1) * NZ, k * NZ:(k + 1) * NZ] = q_blocks[k]
        r_bar = np.kron(np.eye(n), np.diag(cfg.r_diag))

        z_pred0 = np.concatenate([phi[k] @ z0 + d_vec[k] for k in range(n)])
        z_ref_flat = z_ref[1:].reshape(-1)
        err0 = z_pred0 - z_ref_flat
        h_mat = gamma_flat.T @ q_bar @ gamma_flat + r_bar
        g_vec = gamma_flat.T @ q_bar @ err0
        self.last_qp = (h_mat, g_vec)

        # constraints: inputs boxed, predicted v within limits
        v_max = cfg.v_max if cfg.v_max is not None else params.v_max
        n_u = n * NU
        a_box = np.eye(n_u)
        lo_u = np.tile([-params.a_max, -params.delta_max], n)
        hi_u = np.tile([params.a_max, params.delta_max], n)
        v_rows = gamma_flat[2::NZ, :]
        v_base = z_pred0[2::NZ]
        a_con = np.vstack([a_box, v_rows])
        lo = np.concatenate([lo_u, np.full(n, cfg.v_min) - v_base])
        hi = np.concatenate([hi_u, np.full(n, v_max) - v_base])

        result = solve_qp(h_mat, g_vec, A=a_con, l=lo, u=hi, tol=cfg.tol,
                          max_iter=cfg.max_iter, warm=self._shifted_warm())
        self._warm = result
        if not result.converged:
            self.degraded = True

        u = result.x.reshape(n, NU)
        u[:, 0] = np.clip(u[:, 0], -params.a_max, params.a_max)
        u[:, 1] = np.clip(u[:, 1], -params.delta_max, params.delta_max)

        predicted = np.empty((n + 1, NZ))
        predicted[0] = z0
        flat = gamma_flat @ u.reshape(-1)
        for k in range(n):
            predicted[k + 1] = z_pred0[k * NZ:(k + 1) * NZ] + flat[k * NZ:(k + 1) * NZ]
        accel = float(u[0, 0])
        delta_target = float(u[0, 1])
        steer_rate = (delta_target - state.delta) / cfg.dt
        command = ControlInput(steer_rate=steer_rate, accel=accel).clamped(params)
        return MpcSolution(command=command, inputs=u, predicted=predicted,
                           converged=result.converged,
                           iterations=result.iterations,
                           objective_trace=result.objective_trace)

    def _shifted_warm(self) -> QpResult | None:
        if self._warm is None:
            return None
        x = self._warm.x.reshape(-1, NU)
        x_shift = np.vstack([x[1:], x[-1:]])
        y = self._warm.y
        z = self._warm.z
        return QpResult(x=x_shift.reshape(-1), y=y, z=z, iterations=0,
                        converged=False, r_prim=np.inf, r_dual=np.inf)

    def _reference(self, state: VehicleState, trajectory: Trajectory):
        """N+1 reference states spaced cfg.dt in time along the trajectory."""
        cfg = self.cfg
        idx, s0, _ = trajectory.project(state.x, state.y, hint=self._hint)
        self._hint = idx
        kappa = self._curvature(trajectory)
        n_pts = trajectory.n_points

        s = s0
        z_ref = np.empty((cfg.horizon + 1, NZ))
        delta_ref = np.empty(cfg.horizon)
        prev_yaw = None
        for k in range(cfg.horizon + 1):
            x, y, theta, v = trajectory.sample_at_s(s)
            yaw = float(theta[0])
            if prev_yaw is not None:
                yaw = prev_yaw + normalize_angle(yaw - prev_yaw)
            z_ref[k] = (float(x[0]), float(y[0]), float(v[0]), yaw)
            prev_yaw = yaw
            if k < cfg.horizon:
                i = min(int(np.searchsorted(trajectory.ss, trajectory.wrap_s(s))),
                        n_pts - 1)
                delta_ref[k] = math.atan(self.params.wheelbase_l * float(kappa[i]))
                s += max(float(v[0]), 0.3) * cfg.dt
        return z_ref, delta_ref

    @staticmethod
    def _curvature(trajectory: Trajectory) -> np.ndarray:
        if "kappa" not in trajectory.__dict__:
            trajectory.__dict__["kappa"] = polyline_curvature(
                trajectory.xs, trajectory.ys, trajectory.closed)
        return trajectory.__dict__["kappa"]
