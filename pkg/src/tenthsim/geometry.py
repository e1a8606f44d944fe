"""2D poses and rigid-body transforms shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    th = theta % TWO_PI
    if th > math.pi:
        th -= TWO_PI
    return th


def normalize_angle_array(theta: np.ndarray) -> np.ndarray:
    """Vectorized wrap to (-pi, pi]."""
    th = np.mod(theta, TWO_PI)
    return np.where(th > np.pi, th - TWO_PI, th)


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: position in meters, heading in radians CCW from +x.

    The heading is normalized to (-pi, pi] on construction.
    """

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def compose(self, other: "Pose2D") -> "Pose2D":
        """Pose of `other` expressed in this pose's parent frame (self ∘ other)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Pose2D(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.theta + other.theta,
        )

    def transform_point(self, point) -> np.ndarray:
        """Map a point from this pose's local frame into the parent frame."""
        p = np.asarray(point, dtype=float)
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([self.x + c * p[0] - s * p[1], self.y + s * p[0] + c * p[1]])

    def inverse_transform_point(self, point) -> np.ndarray:
        """Map a parent-frame point into this pose's local frame."""
        p = np.asarray(point, dtype=float)
        dx, dy = p[0] - self.x, p[1] - self.y
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([c * dx + s * dy, -s * dx + c * dy])

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])


def segment_intersection(a0, a1, b0, b1) -> float | None:
    """Parameter t in [0, 1] along a0->a1 where it crosses segment b0->b1.

    Both segments are closed: touching an endpoint counts as a crossing.
    Parallel (including collinear) segments return None.
    """
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    b0 = np.asarray(b0, dtype=float)
    b1 = np.asarray(b1, dtype=float)
    r = a1 - a0
    q = b1 - b0
    denom = r[0] * q[1] - r[1] * q[0]
    if denom == 0.0:
        return None
    d = b0 - a0
    t = (d[0] * q[1] - d[1] * q[0]) / denom
    u = (d[0] * r[1] - d[1] * r[0]) / denom
    if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
        return float(t)
    return None


def point_segment_distance(p, a, b) -> float:
    """Euclidean distance from point p to segment a-b."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
    return float(np.hypot(*(p - (a + t * ab))))
