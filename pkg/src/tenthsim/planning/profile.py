"""Curvature-limited velocity profiling."""

from __future__ import annotations

import numpy as np

from ..track import polyline_curvature
from ..vehicle import GRAVITY, VehicleParams

KAPPA_FLOOR = 1e-4


def velocity_profile(xs, ys, params: VehicleParams, closed: bool = False,
                     v_start: float | None = None) -> np.ndarray:
    """Speed per point: lateral-acceleration limit plus accel/decel passes.

    The cap per point is min(v_max, sqrt(mu*g/|kappa|)); a forward pass
    limits acceleration and a backward pass limits deceleration to a_max,
    iterating around the loop for closed paths until a fixed point.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    kappa = polyline_curvature(xs, ys, closed)
    v = np.minimum(params.v_max,
                   np.sqrt(params.mu * GRAVITY / np.maximum(np.abs(kappa),
                                                            KAPPA_FLOOR)))
    if v_start is not None:
        v[0] = min(v[0], v_start)

    n = xs.size
    if closed:
        ds = np.hypot(np.diff(np.concatenate([xs, xs[:1]])),
                      np.diff(np.concatenate([ys, ys[:1]])))
    else:
        ds = np.hypot(np.diff(xs), np.diff(ys))

    a = params.a_max
    for _ in range(n + 2):
        changed = False
        # forward: accel limit
        for i in range(n if closed else n - 1):
            j = (i + 1) % n
            cap = np.sqrt(v[i] ** 2 + 2.0 * a * ds[i])
            if v[j] > cap:
                v[j] = cap
                changed = True
        # backward: decel limit
        for i in range((n if closed else n - 1) - 1, -1, -1):
            j = (i + 1) % n
            cap = np.sqrt(v[j] ** 2 + 2.0 * a * ds[i])
            if v[i] > cap:
                v[i] = cap
                changed = True
        if not changed:
            break
    return v
