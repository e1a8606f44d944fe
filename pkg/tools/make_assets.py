"""Regenerate the bundled tracks, maps, and scenario files in src/tenthsim/data.

Everything here is deterministic; run it after changing track geometry:

    python tools/make_assets.py
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from tenthsim.geometry import Pose2D
from tenthsim.gridmap import OccupancyGridMap, FREE, OCCUPIED, save_map_files
from tenthsim.track import Track, frenet_to_cartesian, save_centerline

DATA = Path(__file__).resolve().parent.parent / "src" / "tenthsim" / "data"
RESOLUTION = 0.05


def ring_centerline(radius=10.0, n=200, half_width=1.0) -> Track:
    phi = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return Track.from_waypoints(radius * np.cos(phi), radius * np.sin(phi),
                                half_width, half_width)


def lbend_track(half_width=1.1) -> Track:
    """L-shaped closed circuit: a rectangle with one quadrant notched out.

    Corner polygon (CCW): (0,0) (18,0) (18,6) (8,6) (8,14) (0,14); convex
    corners rounded with radius r, the concave corner with the same radius.
    """
    r = 2.2
    pts: list[tuple[float, float]] = []

    def arc(cx, cy, a0, a1, n=14):
        for a in np.linspace(a0, a1, n, endpoint=False):
            pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))

    def line(p0, p1, spacing=0.6):
        d = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
        n = max(int(d / spacing), 2)
        for t in np.linspace(0, 1, n, endpoint=False):
            pts.append((p0[0] * (1 - t) + p1[0] * t, p0[1] * (1 - t) + p1[1] * t))

    line((r, 0.0), (18.0 - r, 0.0))
    arc(18.0 - r, r, -np.pi / 2, 0.0)
    line((18.0, r), (18.0, 6.0 - r))
    arc(18.0 - r, 6.0 - r, 0.0, np.pi / 2)
    line((18.0 - r, 6.0), (8.0 + r, 6.0))
    arc(8.0 + r, 6.0 + r, 3 * np.pi / 2, np.pi, n=10)   # concave corner
    line((8.0, 6.0 + r), (8.0, 14.0 - r))
    arc(8.0 - r, 14.0 - r, 0.0, np.pi / 2)
    line((8.0 - r, 14.0), (r, 14.0))
    arc(r, 14.0 - r, np.pi / 2, np.pi)
    line((0.0, 14.0 - r), (0.0, r))
    arc(r, r, np.pi, 3 * np.pi / 2)

    # uniform spacing keeps the discrete curvature (and the raceline QP)
    # well-behaved across the straight/arc joins and the closure seam
    from tenthsim.planning.trajectory import resample_polyline
    xy = np.array(pts)
    xy = resample_polyline(xy[:, 0], xy[:, 1], 0.4, closed=True)
    return Track.from_waypoints(xy[:, 0], xy[:, 1], half_width, half_width)


def rasterize_corridor(track: Track, margin_cells=55, obstacles=()) -> OccupancyGridMap:
    """Occupied everywhere except within the drivable band of the centerline."""
    min_x = track.xs.min() - margin_cells * RESOLUTION
    min_y = track.ys.min() - margin_cells * RESOLUTION
    max_x = track.xs.max() + margin_cells * RESOLUTION
    max_y = track.ys.max() + margin_cells * RESOLUTION
    w = int(round((max_x - min_x) / RESOLUTION))
    h = int(round((max_y - min_y) / RESOLUTION))
    origin = Pose2D(min_x, min_y, 0.0)

    xs = (np.arange(w) + 0.5) * RESOLUTION + min_x
    ys = (np.arange(h) + 0.5) * RESOLUTION + min_y
    gx, gy = np.meshgrid(xs, ys)

    px = np.concatenate([track.xs, track.xs[:1]])
    py = np.concatenate([track.ys, track.ys[:1]])
    ax, ay = px[:-1], py[:-1]
    dx, dy = np.diff(px), np.diff(py)
    seg_len2 = dx * dx + dy * dy
    halfw = np.minimum(track.w_left, track.w_right)

    flat_x = gx.ravel()
    flat_y = gy.ravel()
    free = np.zeros(flat_x.size, dtype=bool)
    chunk = 200_000
    for lo in range(0, flat_x.size, chunk):
        hi = min(lo + chunk, flat_x.size)
        cx = flat_x[lo:hi, None]
        cy = flat_y[lo:hi, None]
        t = np.clip(((cx - ax) * dx + (cy - ay) * dy) / seg_len2, 0.0, 1.0)
        d2 = (cx - (ax + t * dx)) ** 2 + (cy - (ay + t * dy)) ** 2
        j = np.argmin(d2, axis=1)
        rows = np.arange(hi - lo)
        dist = np.sqrt(d2[rows, j])
        free[lo:hi] = dist <= halfw[np.minimum(j, halfw.size - 1)]

    cells = np.full((h, w), OCCUPIED, dtype=np.uint8)
    cells[free.reshape(h, w)] = FREE
    for (ox, oy, size) in obstacles:
        ix = int(math.floor((ox - min_x) / RESOLUTION))
        iy = int(math.floor((oy - min_y) / RESOLUTION))
        half = int(round(size / 2 / RESOLUTION))
        cells[iy - half:iy + half + 1, ix - half:ix + half + 1] = OCCUPIED
    # the world must be sealed: a free band reaching the map edge would let
    # agents (and their sensors) leave the grid
    cells[:3, :] = OCCUPIED
    cells[-3:, :] = OCCUPIED
    cells[:, :3] = OCCUPIED
    cells[:, -3:] = OCCUPIED
    return OccupancyGridMap(resolution=RESOLUTION, origin=origin, cells=cells)


def obstacle_positions(track: Track):
    """Pillars alternating left/right of the centerline, well separated."""
    out = []
    n_obs = 7
    for k in range(n_obs):
        s = (k + 0.5) * track.total_length / n_obs
        d = 0.9 if k % 2 == 0 else -0.9
        pose = frenet_to_cartesian(track, s, d)
        out.append((pose.x, pose.y, 0.4))
    return out


def resolve_raceline_starts():
    """Replace "raceline:<s>" start poses with poses on the optimized line.

    Uses the same inflated planning width as the harness pipelines, so race
    grids sit exactly on the line the cars will try to follow.
    """
    from tenthsim.planning.raceline import min_curvature_raceline
    from tenthsim.harness.pipeline import SAFETY_CLEARANCE

    planning_width = 0.31 + 2.0 * SAFETY_CLEARANCE
    racelines = {}
    for raw in SCENARIOS.values():
        for agent in raw["agents"]:
            pose = agent["start_pose"]
            if not (isinstance(pose, str) and pose.startswith("raceline:")):
                continue
            track_name = raw["track"]
            if track_name not in racelines:
                track = (ring_centerline() if track_name == "ring"
                         else lbend_track())
                racelines[track_name] = min_curvature_raceline(
                    track, planning_width)
            line = racelines[track_name]
            s = float(pose.split(":", 1)[1])
            x, y, theta, _ = line.sample_at_s(s)
            agent["start_pose"] = [round(float(x[0]), 3),
                                   round(float(y[0]), 3),
                                   round(float(theta[0]), 4)]


SCENARIOS = {
    "race1_obstacles": {
        "version": 1,
        "name": "race1_obstacles",
        "race_type": "OBSTACLE_AVOIDANCE",
        "map": "obstacle",
        "track": "obstacle",
        "laps": 2,
        "timeout": 120.0,
        "seed": 7,
        "agents": [
            {"localization": "GROUND_TRUTH", "planner": "GAP",
             "controller": "PURE_PURSUIT", "start_pose": [10.3, 0.35, 1.602],
             "target_speed": 3.0}
        ],
    },
    "race2_timed": {
        "version": 1,
        "name": "race2_timed",
        "race_type": "TIMED_LAP",
        "map": "ring",
        "track": "ring",
        "laps": 3,
        "timeout": 90.0,
        "seed": 11,
        "agents": [
            {"localization": "GPS", "planner": "LANE_SWITCH",
             "controller": "PURE_PURSUIT", "start_pose": [10.0, 0.3, 1.601],
             "target_speed": 4.0}
        ],
    },
    "race3_head_to_head": {
        "version": 1,
        "name": "race3_head_to_head",
        "race_type": "HEAD_TO_HEAD",
        "map": "ring",
        "track": "ring",
        "laps": 3,
        "timeout": 90.0,
        "seed": 42,
        "agents": [
            {"localization": "GROUND_TRUTH", "planner": "LANE_SWITCH",
             "controller": "PURE_PURSUIT", "start_pose": "raceline:0.5",
             "target_speed": 4.5},
            {"localization": "GPS", "planner": "FRENET",
             "controller": "PURE_PURSUIT", "start_pose": "raceline:2.5",
             "target_speed": 3.8}
        ],
    },
    "frenet_avoid": {
        "version": 1,
        "name": "frenet_avoid",
        "race_type": "HEAD_TO_HEAD",
        "map": "ring",
        "track": "ring",
        "laps": 1,
        "timeout": 60.0,
        "seed": 5,
        "agents": [
            {"localization": "GROUND_TRUTH", "planner": "FRENET",
             "controller": "PURE_PURSUIT", "start_pose": [10.0, 0.3, 1.601],
             "target_speed": 3.5},
            {"localization": "GROUND_TRUTH", "planner": "LANE_SWITCH",
             "controller": "PURE_PURSUIT", "start_pose": [8.776, 4.794, 2.071],
             "idle": True}
        ],
    },
    "graph_avoid": {
        "version": 1,
        "name": "graph_avoid",
        "race_type": "HEAD_TO_HEAD",
        "map": "ring",
        "track": "ring",
        "laps": 1,
        "timeout": 60.0,
        "seed": 6,
        "agents": [
            {"localization": "GROUND_TRUTH", "planner": "GRAPH",
             "controller": "PURE_PURSUIT", "start_pose": [10.0, 0.3, 1.601],
             "target_speed": 3.5},
            {"localization": "GROUND_TRUTH", "planner": "LANE_SWITCH",
             "controller": "PURE_PURSUIT", "start_pose": [8.776, 4.794, 2.071],
             "idle": True}
        ],
    },
    "pf_lbend": {
        "version": 1,
        "name": "pf_lbend",
        "race_type": "TIMED_LAP",
        "map": "lbend",
        "track": "lbend",
        "laps": 1,
        "timeout": 90.0,
        "seed": 3,
        "agents": [
            {"localization": "PARTICLE_FILTER", "planner": "LANE_SWITCH",
             "controller": "STANLEY", "start_pose": "raceline:0.8",
             "target_speed": 3.0}
        ],
    },
}


def main():
    DATA.mkdir(parents=True, exist_ok=True)

    ring = ring_centerline()
    save_centerline(ring, DATA / "ring_track.csv")
    grid = rasterize_corridor(ring)
    save_map_files(grid, DATA / "ring_map.png", DATA / "ring_map.yaml")
    print("ring:", grid.width, "x", grid.height, "len", round(ring.total_length, 2))

    lbend = lbend_track()
    save_centerline(lbend, DATA / "lbend_track.csv")
    grid = rasterize_corridor(lbend)
    save_map_files(grid, DATA / "lbend_map.png", DATA / "lbend_map.yaml")
    print("lbend:", grid.width, "x", grid.height, "len", round(lbend.total_length, 2))

    wide = Track.from_waypoints(ring.xs, ring.ys, 2.0, 2.0)
    save_centerline(wide, DATA / "obstacle_track.csv")
    grid = rasterize_corridor(wide, obstacles=obstacle_positions(wide))
    save_map_files(grid, DATA / "obstacle_map.png", DATA / "obstacle_map.yaml")
    print("obstacle:", grid.width, "x", grid.height)

    resolve_raceline_starts()
    for name, raw in SCENARIOS.items():
        (DATA / f"{name}.json").write_text(json.dumps(raw, indent=2) + "\n")
    print("scenarios written to", DATA)


if __name__ == "__main__":
    main()
