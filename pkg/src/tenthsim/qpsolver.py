"""Dense ADMM solver for box/interval-constrained QPs.

Solves  minimize 0.5 x'Px + q'x  subject to  l <= Ax <= u  with the
operator-splitting scheme popularized by OSQP: over-relaxation at 1.6 and a
step size rho that doubles or halves when the primal/dual residuals drift
apart. Problems here are small (tens of variables), so the KKT system is
factored densely and refactored on every rho change.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import InfeasibleBoundsError

ALPHA = 1.6
SIGMA = 1e-6
RHO_CHECK_EVERY = 25
OBJECTIVE_TRACE_EVERY = 50


@dataclass
class QpResult:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    iterations: int
    converged: bool
    r_prim: float
    r_dual: float
    objective_trace: list = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("nan")


def solve_qp(P: np.ndarray, q: np.ndarray, A: np.ndarray | None = None,
             l: np.ndarray | None = None, u: np.ndarray | None = None,
             tol: float = 1e-6, max_iter: int = 500, rho: float = 0.1,
             warm: QpResult | None = None) -> QpResult:
    """Solve the QP; A=None means pure box constraints l <= x <= u.

    Raises InfeasibleBoundsError when any l > u. Convergence is declared
    when both residual infinity-norms drop below tol.
    """
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    n = q.size
    if A is None:
        A = np.eye(n)
    else:
        A = np.asarray(A, dtype=float)
    m = A.shape[0]
    l = np.full(m, -np.inf) if l is None else np.asarray(l, dtype=float)
    u = np.full(m, np.inf) if u is None else np.asarray(u, dtype=float)
    if np.any(l > u):
        k = int(np.argmax(l > u))
        raise InfeasibleBoundsError(f"constraint {k}: lower {l[k]} > upper {u[k]}")

    if warm is not None and warm.x.size == n and warm.z.size == m:
        x = warm.x.copy()
        z = warm.z.copy()
        y = warm.y.copy()
    else:
        x = np.zeros(n)
        z = np.clip(A @ x, l, u)
        y = np.zeros(m)

    # The objective trace is taken at a feasible point so it decreases
    # monotonically; when the leading constraint block is the identity the
    # projected z rows are exactly that point.
    identity_head = m >= n and np.array_equal(A[:n], np.eye(n))

    def feasible_objective():
        xf = z[:n] if identity_head else x
        return float(0.5 * xf @ (P @ xf) + q @ xf)

    at = A.T
    factor = _factor(P, A, rho)
    trace: list = []
    r_prim = np.inf
    r_dual = np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        rhs = SIGMA * x - q + at @ (rho * z - y)
        x = scipy.linalg.cho_solve(factor, rhs)
        ax = A @ x
        z_relaxed = ALPHA * ax + (1.0 - ALPHA) * z
        z_new = np.clip(z_relaxed + y / rho, l, u)
        y = y + rho * (z_relaxed - z_new)

        r_prim = float(np.max(np.abs(ax - z_new))) if m else 0.0
        r_dual = float(np.max(np.abs(rho * (at @ (z_new - z))))) if m else 0.0
        z = z_new

        if it % OBJECTIVE_TRACE_EVERY == 0:
            trace.append(feasible_objective())
        if r_prim <= tol and r_dual <= tol:
            converged = True
            break
        if it % RHO_CHECK_EVERY == 0 and r_prim > 0 and r_dual > 0:
            if r_prim > 10.0 * r_dual:
                rho *= 2.0
                factor = _factor(P, A, rho)
            elif r_dual > 10.0 * r_prim:
                rho /= 2.0
                factor = _factor(P, A, rho)

    trace.append(feasible_objective())
    return QpResult(x=x, y=y, z=z, iterations=it, converged=converged,
                    r_prim=r_prim, r_dual=r_dual, objective_trace=trace)


def _factor(P, A, rho):
    kkt = P + SIGMA * np.eye(P.shape[0]) + rho * (A.T @ A)
    return scipy.linalg.cho_factor(kkt)
