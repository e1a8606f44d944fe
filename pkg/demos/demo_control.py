"""Controller comparison: one disturbance, four trackers.

Run: python demos/demo_control.py
"""

import numpy as np

from tenthsim import Pose2D, ScanSpec, VehicleParams
from tenthsim.control import (LqrConfig, LqrTracker, MpcConfig, MpcTracker,
                              PurePursuitConfig, PurePursuitTracker,
                              StanleyConfig, StanleyTracker)
from tenthsim.engine import AgentSetup, Engine, SimConfig
from tenthsim.gridmap import OccupancyGridMap
from tenthsim.planning.trajectory import Trajectory

params = VehicleParams()
cells = np.zeros((300, 300), dtype=np.uint8)
cells[:3, :] = 1
cells[-3:, :] = 1
cells[:, :3] = 1
cells[:, -3:] = 1
arena = OccupancyGridMap(resolution=0.1, origin=Pose2D(0, 0, 0), cells=cells)

xs = np.linspace(2, 28, 261)
line = Trajectory.from_points(np.column_stack([xs, np.full(261, 15.0)]), 3.0)
start = Pose2D(4.0, 15.5, 0.0)   # half a meter off the reference

trackers = {
    "pure pursuit": PurePursuitTracker(PurePursuitConfig(), params),
    "stanley": StanleyTracker(StanleyConfig(), params),
    "lqr": LqrTracker(LqrConfig(), params),
    "mpc": MpcTracker(MpcConfig(), params),
}

print("0.5 m lateral offset, straight reference at 3 m/s:")
print(f"{'controller':14s} {'t to |e|<5cm':>13s} {'overshoot':>10s} {'steady |e|':>11s}")
for name, tracker in trackers.items():
    eng = Engine(SimConfig(grid=arena,
                           agents=(AgentSetup(params, ScanSpec(num_beams=2,
                                                               noise_std=0),
                                              start),), seed=1))
    eng.reset()
    errs, times = [], []
    while eng.state(0).x < 26.0:
        state = eng.state(0)
        out = eng.step([tracker.control(state, line)])
        errs.append(state.y - 15.0)
        times.append(out.sim_time)
        if out.done:
            break
    errs = np.array(errs)
    below = np.nonzero(np.abs(errs) < 0.05)[0]
    settle = times[below[0]] if below.size else float("nan")
    overshoot = max(0.0, float(-errs.min()))
    steady = float(np.abs(errs[-150:]).max())
    print(f"{name:14s} {settle:12.2f}s {overshoot:9.3f}m {steady:10.4f}m")
