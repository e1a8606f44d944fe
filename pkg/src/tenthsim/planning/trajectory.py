"""Timed/arclength-parameterized trajectories shared by planners and trackers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..geometry import normalize_angle_array


@dataclass(frozen=True)
class Trajectory:
    """Sequence of (x, y, theta, v) samples with cumulative arclength s.

    `source` records which planner produced it; `flag` carries planner status
    such as "INFEASIBLE" or "BLOCKED" (empty = nominal).
    """

    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    thetas: np.ndarray = field(repr=False)
    vs: np.ndarray = field(repr=False)
    ss: np.ndarray = field(repr=False)
    closed: bool = False
    source: str = ""
    flag: str = ""
    cost: float = 0.0

    def __post_init__(self):
        for name in ("xs", "ys", "thetas", "vs", "ss"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_points(cls, points, v, closed: bool = False, source: str = "",
                    flag: str = "", cost: float = 0.0) -> "Trajectory":
        """Build a trajectory from (N, 2) points; headings follow segments."""
        pts = np.asarray(points, dtype=float)
        n = pts.shape[0]
        if n < 2:
            raise ValueError("trajectory needs at least 2 points")
        seg = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
        ss = np.concatenate([[0.0], np.cumsum(seg)])
        if closed:
            dx_next = np.diff(np.concatenate([pts[:, 0], pts[:1, 0]]))
            dy_next = np.diff(np.concatenate([pts[:, 1], pts[:1, 1]]))
            thetas = np.arctan2(dy_next, dx_next)
        else:
            thetas = np.empty(n)
            thetas[:-1] = np.arctan2(np.diff(pts[:, 1]), np.diff(pts[:, 0]))
            thetas[-1] = thetas[-2]
        vs = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
        return cls(xs=pts[:, 0].copy(), ys=pts[:, 1].copy(),
                   thetas=normalize_angle_array(thetas), vs=vs, ss=ss,
                   closed=closed, source=source, flag=flag, cost=cost)

    @property
    def n_points(self) -> int:
        return self.xs.size

    @property
    def length(self) -> float:
        if self.closed:
            return float(self.ss[-1] + np.hypot(self.xs[0] - self.xs[-1],
                                                self.ys[0] - self.ys[-1]))
        return float(self.ss[-1])

    def as_xy(self) -> np.ndarray:
        return np.column_stack([self.xs, self.ys])

    def with_velocity(self, vs) -> "Trajectory":
        vs = np.broadcast_to(np.asarray(vs, dtype=float), (self.n_points,)).copy()
        return replace(self, vs=vs)

    def wrap_s(self, s: float) -> float:
        if self.closed:
            return float(np.mod(s, self.length))
        return float(np.clip(s, 0.0, self.ss[-1]))

    # ------------------------------------------------------------------
    # queries used by the path trackers

    def project(self, x: float, y: float, hint: int | None = None,
                window: int = 25) -> tuple[int, float, float]:
        """Project a point onto the polyline: (segment index, s, signed d).

        d is positive left of the travel direction. A `hint` index restricts
        the search to nearby segments for O(1) tracking queries.
        """
        n = self.n_points
        n_seg = n if self.closed else n - 1
        if hint is None:
            cand = np.arange(n_seg)
        else:
            hint = int(np.clip(hint, 0, n_seg - 1))
            cand = (np.arange(hint - window, hint + window + 1)) % n_seg \
                if self.closed else \
                np.arange(max(hint - window, 0), min(hint + window + 1, n_seg))
        x0 = self.xs[cand]
        y0 = self.ys[cand]
        nxt = (cand + 1) % n
        dx = self.xs[nxt] - x0
        dy = self.ys[nxt] - y0
        seg_len2 = dx * dx + dy * dy
        t = np.clip(((x - x0) * dx + (y - y0) * dy) / np.maximum(seg_len2, 1e-18),
                    0.0, 1.0)
        px = x0 + t * dx
        py = y0 + t * dy
        d2 = (x - px) ** 2 + (y - py) ** 2
        k = int(np.argmin(d2))
        idx = int(cand[k])
        seg_len = float(np.sqrt(seg_len2[k]))
        s = float(self.ss[idx] + t[k] * seg_len)
        tx, ty = dx[k] / max(seg_len, 1e-18), dy[k] / max(seg_len, 1e-18)
        d = float((x - px[k]) * -ty + (y - py[k]) * tx)
        return idx, s, d

    def _padded(self):
        """Cached seam-padded arrays used by arclength interpolation."""
        if "_padded_arrays" not in self.__dict__:
            if self.closed:
                sp = np.concatenate([self.ss, [self.length]])
                xs = np.concatenate([self.xs, self.xs[:1]])
                ys = np.concatenate([self.ys, self.ys[:1]])
                vs = np.concatenate([self.vs, self.vs[:1]])
            else:
                sp, xs, ys, vs = self.ss, self.xs, self.ys, self.vs
            self.__dict__["_padded_arrays"] = (sp, xs, ys, vs)
        return self.__dict__["_padded_arrays"]

    def sample_at_s(self, s) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Interpolate (x, y, theta, v) at arclength(s); wraps when closed."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        sp, xs, ys, vs = self._padded()
        if self.closed:
            sq = np.mod(s, self.length)
        else:
            sq = np.clip(s, 0.0, self.ss[-1])
        x = np.interp(sq, sp, xs)
        y = np.interp(sq, sp, ys)
        v = np.interp(sq, sp, vs)
        idx = np.clip(np.searchsorted(sp, sq, side="right") - 1, 0,
                      self.thetas.size - 1)
        theta = self.thetas[idx]
        return x, y, theta, v

    def point_at_s(self, s: float) -> tuple[float, float, float, float]:
        """Scalar (x, y, theta, v) lookup; the controllers' per-tick path."""
        sp, xs, ys, vs = self._padded()
        if self.closed:
            sq = s % self.length
        else:
            sq = min(max(s, 0.0), float(self.ss[-1]))
        i = int(np.searchsorted(sp, sq, side="right")) - 1
        if i >= sp.size - 1:
            i = sp.size - 2
        if i < 0:
            i = 0
        span = sp[i + 1] - sp[i]
        t = (sq - sp[i]) / span if span > 0.0 else 0.0
        x = xs[i] + t * (xs[i + 1] - xs[i])
        y = ys[i] + t * (ys[i + 1] - ys[i])
        v = vs[i] + t * (vs[i + 1] - vs[i])
        th = self.thetas[min(i, self.thetas.size - 1)]
        return float(x), float(y), float(th), float(v)

    def slice_by_s(self, s0: float, s1: float) -> "Trajectory":
        """Sub-trajectory covering arclengths [s0, s1] (wraps when closed)."""
        step = max(np.median(np.diff(self.ss)) if self.n_points > 1 else 0.1, 1e-3)
        length = s1 - s0
        n = max(int(np.ceil(length / step)) + 1, 2)
        grid = s0 + np.linspace(0.0, length, n)
        x, y, theta, v = self.sample_at_s(grid)
        ss = grid - s0
        return Trajectory(xs=x, ys=y, thetas=theta, vs=v, ss=ss, closed=False,
                          source=self.source, flag=self.flag, cost=self.cost)


def trajectory_to_csv(trajectory: Trajectory, path, w_left=0.1, w_right=0.1) -> None:
    """Write a trajectory in the centerline CSV dialect plus a v_mps column.

    Lanes and racelines carry no width information of their own; the width
    columns default to a nominal corridor so the file round-trips as a track.
    """
    header = "# x_m, y_m, w_tr_right_m, w_tr_left_m, v_mps"
    wl = np.broadcast_to(np.asarray(w_left, dtype=float), (trajectory.n_points,))
    wr = np.broadcast_to(np.asarray(w_right, dtype=float), (trajectory.n_points,))
    with open(path, "w") as f:
        f.write(header + "\n")
        for x, y, right, left, v in zip(trajectory.xs, trajectory.ys, wr, wl,
                                        trajectory.vs):
            f.write(f"{x:.9g}, {y:.9g}, {right:.9g}, {left:.9g}, {v:.9g}\n")


def resample_polyline(xs, ys, spacing: float, closed: bool = False) -> np.ndarray:
    """Resample a polyline to (M, 2) points at uniform arclength spacing."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if closed:
        xs = np.concatenate([xs, xs[:1]])
        ys = np.concatenate([ys, ys[:1]])
    seg = np.hypot(np.diff(xs), np.diff(ys))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    n = max(int(round(total / spacing)), 2)
    grid = np.linspace(0.0, total, n + 1)
    if closed:
        grid = grid[:-1]  # avoid duplicating the seam point
    return np.column_stack([np.interp(grid, s, xs), np.interp(grid, s, ys)])
