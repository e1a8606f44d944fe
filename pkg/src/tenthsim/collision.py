"""Collision tests: oriented rectangles, footprint-vs-map, line crossings.

The footprint-vs-map and rectangle-vs-rectangle kernels are jitted because
the engine calls them every physics substep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose2D
from .gridmap import OccupancyGridMap

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

FORWARD = 1
BACKWARD = -1
NONE = 0


@dataclass(frozen=True)
class FootprintRect:
    """Oriented rectangle: center, heading, and extents in meters."""

    cx: float
    cy: float
    heading: float
    length: float
    width: float

    @classmethod
    def from_pose(cls, pose: Pose2D, length: float, width: float) -> "FootprintRect":
        return cls(pose.x, pose.y, pose.theta, length, width)

    def as_tuple(self) -> tuple:
        return (self.cx, self.cy, self.heading, self.length, self.width)

    def corners(self) -> np.ndarray:
        """4x2 corner coordinates, CCW starting front-left."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        hl, hw = self.length / 2.0, self.width / 2.0
        local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + np.array([self.cx, self.cy])

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside (or on the boundary of) the rect."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        dx = pts[:, 0] - self.cx
        dy = pts[:, 1] - self.cy
        u = c * dx + s * dy
        v = -s * dx + c * dy
        return (np.abs(u) <= self.length / 2.0) & (np.abs(v) <= self.width / 2.0)


@njit(cache=True)
def _obb_overlap(ax, ay, ath, al, aw, bx, by, bth, bl, bw):
    """Separating-axis test over both boxes' axes; touching counts as overlap."""
    # corner offsets of each rect
    for k in range(2):
        if k == 0:
            th = ath
        else:
            th = bth
        c = math.cos(th)
        s = math.sin(th)
        for axis in range(2):
            if axis == 0:
                ux, uy = c, s
            else:
                ux, uy = -s, c
            # projection of rect A
            ca = math.cos(ath)
            sa = math.sin(ath)
            centa = ax * ux + ay * uy
            ra = abs((ca * ux + sa * uy) * al / 2.0) + abs((-sa * ux + ca * uy) * aw / 2.0)
            # projection of rect B
            cb = math.cos(bth)
            sb = math.sin(bth)
            centb = bx * ux + by * uy
            rb = abs((cb * ux + sb * uy) * bl / 2.0) + abs((-sb * ux + cb * uy) * bw / 2.0)
            if centa + ra < centb - rb or centb + rb < centa - ra:
                return False
    return True


def check_obb_collision(rect_a: FootprintRect, rect_b: FootprintRect) -> bool:
    """True when the rectangles overlap or touch."""
    return bool(_obb_overlap(*rect_a.as_tuple(), *rect_b.as_tuple()))


@njit(cache=True)
def _rect_hits_map(blocked, res, o_x, o_y, o_th, cx, cy, heading, length, width):
    """Footprint-vs-grid test in the grid's local frame.

    True iff any blocked cell center falls inside the rectangle or any of the
    4 corners lies in a blocked cell; a footprint with no corner and no
    center inside the map counts as a wall hit.
    """
    h, w = blocked.shape
    co = math.cos(o_th)
    so = math.sin(o_th)
    # rect center and heading in grid-local coordinates
    dx = cx - o_x
    dy = cy - o_y
    lx = co * dx + so * dy
    ly = -so * dx + co * dy
    lth = heading - o_th
    cr = math.cos(lth)
    sr = math.sin(lth)
    hl = length / 2.0
    hw = width / 2.0

    min_x = 1e30
    max_x = -1e30
    min_y = 1e30
    max_y = -1e30
    inside_any = False
    for k in range(4):
        if k == 0:
            ox_, oy_ = hl, hw
        elif k == 1:
            ox_, oy_ = -hl, hw
        elif k == 2:
            ox_, oy_ = -hl, -hw
        else:
            ox_, oy_ = hl, -hw
        px = lx + cr * ox_ - sr * oy_
        py = ly + sr * ox_ + cr * oy_
        if px < min_x:
            min_x = px
        if px > max_x:
            max_x = px
        if py < min_y:
            min_y = py
        if py > max_y:
            max_y = py
        ix = int(math.floor(px / res))
        iy = int(math.floor(py / res))
        if 0 <= ix < w and 0 <= iy < h:
            inside_any = True
            if blocked[iy, ix]:
                return True
    icx = int(math.floor(lx / res))
    icy = int(math.floor(ly / res))
    if 0 <= icx < w and 0 <= icy < h:
        inside_any = True
        if blocked[icy, icx]:
            return True
    if not inside_any:
        return True  # fully outside the world

    ix0 = max(int(math.floor(min_x / res)), 0)
    iy0 = max(int(math.floor(min_y / res)), 0)
    ix1 = min(int(math.floor(max_x / res)), w - 1)
    iy1 = min(int(math.floor(max_y / res)), h - 1)
    for iy in range(iy0, iy1 + 1):
        for ix in range(ix0, ix1 + 1):
            if blocked[iy, ix]:
                gx = (ix + 0.5) * res - lx
                gy = (iy + 0.5) * res - ly
                u = cr * gx + sr * gy
                v = -sr * gx + cr * gy
                if abs(u) <= hl and abs(v) <= hw:
                    return True
    return False


def check_map_collision(grid: OccupancyGridMap, footprint: FootprintRect) -> bool:
    """True when the footprint overlaps any blocked cell or leaves the map."""
    return bool(_rect_hits_map(grid.blocked, grid.resolution,
                               grid.origin.x, grid.origin.y, grid.origin.theta,
                               footprint.cx, footprint.cy, footprint.heading,
                               footprint.length, footprint.width))


@dataclass(frozen=True)
class StartLine:
    """Finite segment with a forward direction for lap counting.

    `forward` is the unit vector pointing in the race direction; a crossing
    counts FORWARD when the motion has positive component along it.
    """

    x0: float
    y0: float
    x1: float
    y1: float
    fx: float
    fy: float

    @classmethod
    def from_points(cls, p0, p1, forward) -> "StartLine":
        fx, fy = float(forward[0]), float(forward[1])
        norm = math.hypot(fx, fy)
        if norm == 0.0:
            raise ValueError("forward direction must be nonzero")
        return cls(float(p0[0]), float(p0[1]), float(p1[0]), float(p1[1]),
                   fx / norm, fy / norm)


def detect_line_crossing(prev_xy, new_xy, line: StartLine) -> int:
    """FORWARD/BACKWARD/NONE for the motion segment prev->new vs the line.

    Segments are closed, so grazing an endpoint counts as a crossing.
    Motion parallel to the line never counts.
    """
    ax, ay = float(prev_xy[0]), float(prev_xy[1])
    bx, by = float(new_xy[0]), float(new_xy[1])
    rx, ry = bx - ax, by - ay
    qx, qy = line.x1 - line.x0, line.y1 - line.y0
    denom = rx * qy - ry * qx
    if denom == 0.0:
        return NONE
    dx, dy = line.x0 - ax, line.y0 - ay
    t = (dx * qy - dy * qx) / denom
    u = (dx * ry - dy * rx) / denom
    if not (0.0 <= t <= 1.0 and 0.0 <= u <= 1.0):
        return NONE
    direction = rx * line.fx + ry * line.fy
    if direction > 0.0:
        return FORWARD
    if direction < 0.0:
        return BACKWARD
    return NONE
