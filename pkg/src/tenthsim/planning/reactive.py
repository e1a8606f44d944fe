"""Reactive safety and steering: emergency braking and gap following."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..sensing import LaserScan

ITTC_EPS = 1e-3


def aeb_should_brake(scan: LaserScan, v: float, threshold_s: float = 0.5) -> bool:
    """Instantaneous time-to-collision check over forward-facing beams.

    iTTC per beam is range / (v * cos(beam angle)); beams pointing backward
    (cos <= 0) are excluded. At v = 0 there is no closing speed and the
    answer is always False.
    """
    angles = scan.angles
    cos_a = np.cos(angles)
    forward = cos_a > 0.0
    if not forward.any():
        return False
    closing = np.maximum(ITTC_EPS, v * cos_a[forward])
    ittc = scan.ranges[forward] / closing
    return bool(ittc.min() < threshold_s)


@dataclass(frozen=True)
class GapFollowerConfig:
    bubble_radius: float = 0.3
    free_threshold: float = 1.5
    max_clip: float = 10.0
    v_straight: float = 3.0
    max_steer: float = 0.4189
    speed_drop: float = 0.7    # fraction of speed shed at full steering lock


@dataclass(frozen=True)
class GapCommand:
    steer: float
    speed: float
    no_gap: bool = False


def follow_the_gap(scan: LaserScan, cfg: GapFollowerConfig = GapFollowerConfig()) -> GapCommand:
    """Steer toward the best beam inside the widest free gap.

    Pipeline: clip ranges, carve a safety bubble around the closest
    obstacle, find the widest run of beams above the free threshold, then
    pick the deepest beam in it. Ties resolve toward the gap center, then
    toward straight ahead, then to the lower index. With no gap at all the
    command is (0, 0) with no_gap set.
    """
    r = np.clip(scan.ranges, 0.0, cfg.max_clip)
    angles = scan.angles
    n = r.size

    i_min = int(np.argmin(r))
    d_min = r[i_min]
    if d_min <= cfg.free_threshold:  # bubble only around an actual obstacle
        half_angle = math.asin(min(1.0, cfg.bubble_radius / max(d_min, cfg.bubble_radius)))
        beam_step = scan.fov / (n - 1)
        di = int(math.ceil(half_angle / beam_step))
        lo = max(i_min - di, 0)
        hi = min(i_min + di + 1, n)
        r = r.copy()
        r[lo:hi] = 0.0

    free = r > cfg.free_threshold
    if not free.any():
        return GapCommand(steer=0.0, speed=0.0, no_gap=True)

    # widest contiguous run of free beams
    padded = np.concatenate([[False], free, [False]]).astype(np.int8)
    edges = np.diff(padded)
    starts = np.nonzero(edges == 1)[0]
    ends = np.nonzero(edges == -1)[0]  # exclusive
    widths = ends - starts
    center_idx = (n - 1) / 2.0
    best_run = _pick(widths, -np.abs((starts + ends - 1) / 2.0 - center_idx))
    s0, s1 = int(starts[best_run]), int(ends[best_run])

    run = r[s0:s1]
    run_center = (s1 - 1 - s0) / 2.0
    local = np.arange(run.size)
    best_local = _pick(run, -np.abs(local - run_center),
                       -np.abs(local + s0 - center_idx))
    best = s0 + int(best_local)

    steer = float(np.clip(angles[best], -cfg.max_steer, cfg.max_steer))
    speed = cfg.v_straight * (1.0 - cfg.speed_drop * abs(steer) / cfg.max_steer)
    return GapCommand(steer=steer, speed=speed)


def _pick(*keys) -> int:
    """Index of the lexicographic maximum over equal-length key arrays.

    Later keys break ties among earlier ones; the final tie-break is the
    lowest index.
    """
    candidates = np.arange(keys[0].size)
    for key in keys:
        k = np.asarray(key, dtype=float)[candidates]
        candidates = candidates[k >= k.max() - 1e-12]
        if candidates.size == 1:
            break
    return int(candidates[0])
