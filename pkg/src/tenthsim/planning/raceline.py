"""Minimum-curvature raceline via iterated box-constrained QPs.

Lateral offsets alpha (one per waypoint, along the centerline's left
normals) are optimized to minimize the sum of squared curvatures of the
offset path. Each outer iteration linearizes the discrete curvature around
the current path (exact banded Jacobian via three-coloring finite
differences) and solves the resulting QP with the in-repo ADMM solver
inside a trust region; the offsets stay within the drivable corridor minus
half a vehicle width.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..qpsolver import solve_qp
from ..track import Track, polyline_curvature
from ..vehicle import VehicleParams
from .profile import velocity_profile
from .trajectory import Trajectory

MAX_OUTER_ITERS = 10
CONVERGENCE_TOL = 1e-3   # meters, on the offset update
TRUST_RADIUS = 0.3       # meters per outer iteration
REGULARIZATION = 1e-4
FD_EPS = 1e-5


def min_curvature_raceline(track: Track, vehicle_width: float,
                           params: VehicleParams | None = None) -> Trajectory:
    """Optimize the raceline of a closed track; returns it with a velocity profile."""
    if not track.closed:
        raise DomainError("raceline optimization requires a closed track")
    if track.n_waypoints < 20:
        raise DomainError(f"need >= 20 waypoints, got {track.n_waypoints}")
    params = params or VehicleParams()
    margin = vehicle_width / 2.0
    lo = -(track.w_right - margin)
    hi = track.w_left - margin
    if np.any(hi < lo):
        raise DomainError("track narrower than the vehicle somewhere")

    normals = _waypoint_normals(track)
    alpha = np.zeros(track.n_waypoints)

    for _ in range(MAX_OUTER_ITERS):
        kappa0, jac = _curvature_and_jacobian(track, normals, alpha)
        # minimize ||kappa0 + J da||^2 + reg||da||^2 within box and trust region
        p_mat = 2.0 * (jac.T @ jac + REGULARIZATION * np.eye(alpha.size))
        q_vec = 2.0 * (jac.T @ kappa0)
        da_lo = np.maximum(lo - alpha, -TRUST_RADIUS)
        da_hi = np.minimum(hi - alpha, TRUST_RADIUS)
        result = solve_qp(p_mat, q_vec, l=da_lo, u=da_hi, tol=1e-8, max_iter=4000)
        # accept the step only if the true objective improves
        candidate = np.clip(alpha + result.x, lo, hi)
        if _objective(track, normals, candidate) <= _objective(track, normals, alpha):
            step = candidate - alpha
            alpha = candidate
        else:
            break
        if np.max(np.abs(step)) < CONVERGENCE_TOL:
            break

    xs, ys = _offset_path(track, normals, alpha)
    v = velocity_profile(xs, ys, params, closed=True)
    pts = np.column_stack([xs, ys])
    return Trajectory.from_points(pts, v, closed=True, source="raceline")


def _waypoint_normals(track: Track) -> np.ndarray:
    """Left unit normal per waypoint from wrapped central differences."""
    xs, ys = track.xs, track.ys
    dx = np.roll(xs, -1) - np.roll(xs, 1)
    dy = np.roll(ys, -1) - np.roll(ys, 1)
    norm = np.hypot(dx, dy)
    return np.column_stack([-dy / norm, dx / norm])


def _offset_path(track: Track, normals: np.ndarray, alpha: np.ndarray):
    xs = track.xs + alpha * normals[:, 0]
    ys = track.ys + alpha * normals[:, 1]
    return xs, ys


def _objective(track: Track, normals: np.ndarray, alpha: np.ndarray) -> float:
    xs, ys = _offset_path(track, normals, alpha)
    k = polyline_curvature(xs, ys, closed=True)
    return float(k @ k)


def _curvature_and_jacobian(track: Track, normals: np.ndarray,
                            alpha: np.ndarray):
    """Discrete curvature and its banded Jacobian wrt the offsets.

    kappa_i depends only on alpha_{i-1..i+1}, so perturbing every third
    offset at once recovers all Jacobian columns in three curvature
    evaluations.
    """
    n = alpha.size
    xs, ys = _offset_path(track, normals, alpha)
    kappa0 = polyline_curvature(xs, ys, closed=True)
    jac = np.zeros((n, n))
    # stride-3 groups keep perturbed columns at cyclic distance >= 3, so the
    # banded stencils never interfere; any wrap leftovers go one at a time
    n_trim = n - (n % 3)
    groups = [list(range(k, n_trim, 3)) for k in range(3)]
    groups += [[j] for j in range(n_trim, n)]
    for group in groups:
        pert = alpha.copy()
        pert[group] += FD_EPS
        xs_p, ys_p = _offset_path(track, normals, pert)
        dk = (polyline_curvature(xs_p, ys_p, closed=True) - kappa0) / FD_EPS
        for j in group:
            for di in (-1, 0, 1):
                i = (j + di) % n
                jac[i, j] = dk[i]
    return kappa0, jac
