"""Track centerlines: arclength, curvature, and Frenet-frame conversions.

A track is a polyline of waypoints carrying left/right drivable widths. The
lateral Frenet coordinate d is positive to the LEFT of the direction of
travel. Closed tracks wrap their arclength at the total length.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import PointTooFarError, TrackFormatError
from .geometry import normalize_angle, Pose2D

CLOSED_GAP_FACTOR = 1.5


@dataclass(frozen=True)
class Track:
    """Centerline waypoints with widths and derived arclength/curvature."""

    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    w_left: np.ndarray = field(repr=False)
    w_right: np.ndarray = field(repr=False)
    closed: bool
    s: np.ndarray = field(repr=False)
    kappa: np.ndarray = field(repr=False)
    total_length: float

    @classmethod
    def from_waypoints(cls, xs, ys, w_left, w_right) -> "Track":
        xs = np.ascontiguousarray(xs, dtype=np.float64)
        ys = np.ascontiguousarray(ys, dtype=np.float64)
        w_left = np.broadcast_to(np.asarray(w_left, dtype=np.float64), xs.shape).copy()
        w_right = np.broadcast_to(np.asarray(w_right, dtype=np.float64), xs.shape).copy()
        # A repeated first waypoint at the end is a common closure marker.
        if xs.size >= 2 and xs[0] == xs[-1] and ys[0] == ys[-1]:
            xs, ys = xs[:-1].copy(), ys[:-1].copy()
            w_left, w_right = w_left[:-1], w_right[:-1]
        n = xs.size
        if n < 3:
            raise TrackFormatError(f"need at least 3 waypoints, got {n}")
        seg = np.hypot(np.diff(xs), np.diff(ys))
        if np.any(seg == 0.0):
            k = int(np.argmin(seg))
            raise TrackFormatError(f"duplicate consecutive waypoints at index {k}")
        close_gap = float(np.hypot(xs[0] - xs[-1], ys[0] - ys[-1]))
        closed = close_gap <= CLOSED_GAP_FACTOR * float(seg.mean())
        s = np.concatenate([[0.0], np.cumsum(seg)])
        total = float(s[-1] + close_gap) if closed else float(s[-1])
        kappa = _polyline_curvature(xs, ys, s, closed, total)
        for arr in (xs, ys, w_left, w_right, s, kappa):
            arr.setflags(write=False)
        return cls(xs=xs, ys=ys, w_left=w_left, w_right=w_right, closed=closed,
                   s=s, kappa=kappa, total_length=total)

    @property
    def n_waypoints(self) -> int:
        return self.xs.size

    @property
    def _segments(self) -> dict:
        """Cached per-segment geometry, including the wrap segment if closed."""
        if "_segments" not in self.__dict__:
            if self.closed:
                x2 = np.concatenate([self.xs, self.xs[:1]])
                y2 = np.concatenate([self.ys, self.ys[:1]])
            else:
                x2, y2 = self.xs, self.ys
            dx = np.diff(x2)
            dy = np.diff(y2)
            length = np.hypot(dx, dy)
            tx = dx / length
            ty = dy / length
            s0 = np.concatenate([[0.0], np.cumsum(length)])[:-1]
            self.__dict__["_segments"] = {
                "x0": x2[:-1], "y0": y2[:-1], "tx": tx, "ty": ty,
                "length": length, "s0": s0,
            }
        return self.__dict__["_segments"]

    def wrap_s(self, s: float) -> float:
        if self.closed:
            return float(np.mod(s, self.total_length))
        return float(np.clip(s, 0.0, self.total_length))

    def reversed(self) -> "Track":
        return Track.from_waypoints(self.xs[::-1], self.ys[::-1],
                                    self.w_right[::-1], self.w_left[::-1])


def polyline_curvature(xs, ys, closed: bool) -> np.ndarray:
    """Signed curvature of an arbitrary polyline (see _polyline_curvature)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    seg = np.hypot(np.diff(xs), np.diff(ys))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = float(s[-1] + np.hypot(xs[0] - xs[-1], ys[0] - ys[-1])) if closed \
        else float(s[-1])
    return _polyline_curvature(xs, ys, s, closed, total)


def _polyline_curvature(xs, ys, s, closed: bool, total: float) -> np.ndarray:
    """Signed curvature per waypoint via nonuniform central differences in s.

    Closed tracks wrap the three-point stencil across the seam; open tracks
    copy the adjacent interior value at the endpoints. Positive curvature
    turns left (CCW).
    """
    n = xs.size
    kappa = np.zeros(n)
    idx = np.arange(n)
    if closed:
        im = np.roll(idx, 1)
        ip = np.roll(idx, -1)
        h1 = np.empty(n)
        h2 = np.empty(n)
        h1[1:] = s[1:] - s[:-1]
        h1[0] = total - s[-1]
        h2[:-1] = s[1:] - s[:-1]
        h2[-1] = total - s[-1]
        interior = np.ones(n, dtype=bool)
    else:
        im = np.clip(idx - 1, 0, n - 1)
        ip = np.clip(idx + 1, 0, n - 1)
        h1 = np.empty(n)
        h2 = np.empty(n)
        h1[1:] = s[1:] - s[:-1]
        h1[0] = 1.0
        h2[:-1] = s[1:] - s[:-1]
        h2[-1] = 1.0
        interior = np.zeros(n, dtype=bool)
        interior[1:-1] = True

    hs = h1 + h2
    denom1 = h1 * h2 * hs
    xp = (xs[ip] * h1**2 - xs[im] * h2**2 + xs[idx] * (h2**2 - h1**2)) / denom1
    yp = (ys[ip] * h1**2 - ys[im] * h2**2 + ys[idx] * (h2**2 - h1**2)) / denom1
    xpp = 2.0 * (xs[im] * h2 - xs[idx] * hs + xs[ip] * h1) / denom1
    ypp = 2.0 * (ys[im] * h2 - ys[idx] * hs + ys[ip] * h1) / denom1
    speed = np.hypot(xp, yp)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (xp * ypp - yp * xpp) / np.maximum(speed, 1e-12) ** 3
    kappa[interior] = k[interior]
    if not closed:
        kappa[0] = kappa[1]
        kappa[-1] = kappa[-2]
    return kappa


def load_centerline(csv_text: str) -> Track:
    """Parse a centerline CSV with columns x_m, y_m, w_tr_right_m, w_tr_left_m.

    Lines starting with '#' are comments; a track is closed when first and
    last waypoints are within 1.5x the mean waypoint spacing.
    """
    rows = []
    for lineno, raw in enumerate(io.StringIO(csv_text), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) < 4:
            raise TrackFormatError(f"line {lineno}: expected 4 columns, got {len(parts)}")
        try:
            vals = [float(p) for p in parts[:4]]
        except ValueError as exc:
            raise TrackFormatError(f"line {lineno}: {exc}") from exc
        rows.append(vals)
    if len(rows) < 3:
        raise TrackFormatError(f"need at least 3 waypoints, got {len(rows)}")
    arr = np.array(rows)
    return Track.from_waypoints(arr[:, 0], arr[:, 1], w_left=arr[:, 3], w_right=arr[:, 2])


def load_centerline_file(path) -> Track:
    with open(path, "r") as f:
        return load_centerline(f.read())


def save_centerline(track: Track, path, velocities=None) -> None:
    """Write a track (optionally with a velocity column) in the CSV dialect."""
    header = "# x_m, y_m, w_tr_right_m, w_tr_left_m"
    cols = [track.xs, track.ys, track.w_right, track.w_left]
    if velocities is not None:
        header += ", v_mps"
        cols.append(np.asarray(velocities, dtype=float))
    with open(path, "w") as f:
        f.write(header + "\n")
        for row in zip(*cols):
            f.write(", ".join(f"{v:.9g}" for v in row) + "\n")


def cartesian_to_frenet(track: Track, point, s_hint: float | None = None,
                        window: float = 5.0) -> tuple[float, float]:
    """Project a world point to (s, d): arclength and signed lateral offset.

    d is positive to the left of the travel direction. With `s_hint` the
    search is restricted to segments within `window` meters of the hint
    (O(1) tracking queries); otherwise all segments are searched. Ties
    between equidistant segments resolve to the smaller s.
    """
    p = np.asarray(point, dtype=float)
    seg = track._segments
    if s_hint is None:
        mask = slice(None)
    else:
        hint = track.wrap_s(float(s_hint))
        ds = np.abs(seg["s0"] - hint)
        if track.closed:
            ds = np.minimum(ds, track.total_length - ds)
        mask = ds <= window + seg["length"].max()
        if not np.any(mask):
            mask = slice(None)

    x0 = seg["x0"][mask]
    y0 = seg["y0"][mask]
    tx = seg["tx"][mask]
    ty = seg["ty"][mask]
    length = seg["length"][mask]
    s0 = seg["s0"][mask]

    rx = p[0] - x0
    ry = p[1] - y0
    t = np.clip((rx * tx + ry * ty) / length, 0.0, 1.0) * length
    cx = x0 + t * tx
    cy = y0 + t * ty
    d2 = (p[0] - cx) ** 2 + (p[1] - cy) ** 2
    best = int(np.argmin(d2))
    ties = np.nonzero(d2 <= d2[best] + 1e-12)[0]
    if ties.size > 1:
        best = int(ties[np.argmin(s0[ties] + t[ties])])

    s = float(s0[best] + t[best])
    d = float((p[0] - cx[best]) * -ty[best] + (p[1] - cy[best]) * tx[best])

    max_w = float(max(track.w_left.max(), track.w_right.max()))
    if np.sqrt(d2[best]) > 2.0 * max_w:
        raise PointTooFarError(
            f"point {p.tolist()} is {np.sqrt(d2[best]):.3f} m from the centerline "
            f"(limit {2.0 * max_w:.3f} m)")
    return track.wrap_s(s), d


def frenet_to_cartesian(track: Track, s: float, d: float) -> Pose2D:
    """World pose at arclength s, offset d left of the centerline.

    s wraps on closed tracks and clamps on open ones; heading follows the
    local tangent.
    """
    x, y, theta = frenet_to_cartesian_arrays(track, np.array([s]), np.array([d]))
    return Pose2D(float(x[0]), float(y[0]), float(theta[0]))


def frenet_to_cartesian_arrays(track: Track, s, d):
    """Vectorized frenet_to_cartesian; returns (x, y, theta) arrays."""
    seg = track._segments
    s = np.asarray(s, dtype=float)
    d = np.broadcast_to(np.asarray(d, dtype=float), s.shape)
    if track.closed:
        sw = np.mod(s, track.total_length)
    else:
        sw = np.clip(s, 0.0, track.total_length)
    edges = np.concatenate([seg["s0"], [track.total_length]])
    idx = np.clip(np.searchsorted(edges, sw, side="right") - 1, 0, seg["s0"].size - 1)
    t = sw - seg["s0"][idx]
    tx = seg["tx"][idx]
    ty = seg["ty"][idx]
    x = seg["x0"][idx] + t * tx - d * ty
    y = seg["y0"][idx] + t * ty + d * tx
    theta = np.arctan2(ty, tx)
    return x, y, theta


def track_pose_at(track: Track, s: float) -> Pose2D:
    """Centerline pose at arclength s."""
    return frenet_to_cartesian(track, s, 0.0)


def curvature_at(track: Track, s) -> np.ndarray:
    """Centerline curvature linearly interpolated at arclength(s) s."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if track.closed:
        sw = np.mod(s, track.total_length)
        sp = np.concatenate([track.s, [track.total_length]])
        kp = np.concatenate([track.kappa, [track.kappa[0]]])
        return np.interp(sw, sp, kp)
    return np.interp(np.clip(s, 0.0, track.total_length), track.s, track.kappa)


def width_at(track: Track, s) -> tuple[np.ndarray, np.ndarray]:
    """Interpolated (w_left, w_right) at arclength(s) s."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if track.closed:
        sw = np.mod(s, track.total_length)
        sp = np.concatenate([track.s, [track.total_length]])
        wl = np.concatenate([track.w_left, [track.w_left[0]]])
        wr = np.concatenate([track.w_right, [track.w_right[0]]])
        return np.interp(sw, sp, wl), np.interp(sw, sp, wr)
    sc = np.clip(s, 0.0, track.total_length)
    return np.interp(sc, track.s, track.w_left), np.interp(sc, track.s, track.w_right)


def heading_error(track: Track, s: float, theta: float) -> float:
    """Heading minus track tangent direction at s, wrapped to (-pi, pi]."""
    pose = track_pose_at(track, s)
    return normalize_angle(theta - pose.theta)
