"""Planner tour: raceline optimization, lanes, Frenet candidates, gap following.

Run: python demos/demo_planning.py
"""

import numpy as np

from tenthsim import ScanSpec, VehicleParams, VehicleState
from tenthsim.planning import (FrenetConfig, GapFollowerConfig, build_lanes,
                               follow_the_gap, frenet_candidates, frenet_select,
                               min_curvature_raceline, velocity_profile)
from tenthsim.collision import FootprintRect
from tenthsim.track import Track, frenet_to_cartesian, polyline_curvature, track_pose_at
from tenthsim.sensing import LaserScan

params = VehicleParams()

# --- raceline on a ring ---------------------------------------------------------
phi = np.linspace(0, 2 * np.pi, 200, endpoint=False)
ring = Track.from_waypoints(10 * np.cos(phi), 10 * np.sin(phi), 1.0, 1.0)
raceline = min_curvature_raceline(ring, vehicle_width=0.31)
k0 = float(np.abs(ring.kappa).mean())
k1 = float(np.abs(polyline_curvature(raceline.xs, raceline.ys, True)).mean())
print("min-curvature raceline on a ring (R=10, half-width 1):")
print(f"  mean |curvature| {k0:.4f} -> {k1:.4f} 1/m "
      f"(radius {1 / k0:.2f} -> {1 / k1:.2f} m)")
print(f"  top speed from the profile: {raceline.vs.max():.1f} m/s")

# --- lanes ----------------------------------------------------------------------
lanes = build_lanes(ring, 5, vehicle_width=0.31)
print(f"\n5 equispaced lanes, offsets: {np.round(lanes.offsets, 3)}")
print(f"  lane lengths: {[round(l.length, 1) for l in lanes.lanes]} m")

# --- frenet candidates around a parked car --------------------------------------
pose = track_pose_at(ring, 2.0)
state = VehicleState(x=pose.x, y=pose.y, theta=pose.theta, v=3.0)
cfg = FrenetConfig(target_speed=3.5)
cands = frenet_candidates(state, ring, params, cfg)
parked = frenet_to_cartesian(ring, 5.5, 0.0)
opponent = FootprintRect(parked.x, parked.y, parked.theta, 0.6, 0.35)
best = frenet_select(cands, None, [opponent], params, cfg)
from tenthsim.track import cartesian_to_frenet
_, d_end = cartesian_to_frenet(ring, (best.xs[-1], best.ys[-1]))
print(f"\nfrenet planner vs a car parked on the centerline 3.5 m ahead:")
print(f"  {len(cands)} candidates, selected goal offset d = {d_end:+.2f} m "
      f"(cost {best.cost:.3f})")

# --- gap follower ----------------------------------------------------------------
n = 181
ranges = np.full(n, 6.0)
ranges[85:96] = 0.9  # obstacle dead ahead
scan = LaserScan(ranges=ranges, fov=4.712)
cmd = follow_the_gap(scan, GapFollowerConfig())
print(f"\ngap follower with a pillar dead ahead: steer {cmd.steer:+.2f} rad, "
      f"speed {cmd.speed:.2f} m/s")
