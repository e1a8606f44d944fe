"""Path-tracking controllers: pure pursuit, Stanley, LQR, and MPC."""

from .lqr import LqrConfig, LqrTracker, solve_dare
from .mpc import MpcConfig, MpcTracker
from .pure_pursuit import PurePursuitConfig, PurePursuitTracker, pure_pursuit
from .stanley import StanleyConfig, StanleyTracker, stanley

__all__ = [
    "LqrConfig", "LqrTracker", "solve_dare",
    "MpcConfig", "MpcTracker",
    "PurePursuitConfig", "PurePursuitTracker", "pure_pursuit",
    "StanleyConfig", "StanleyTracker", "stanley",
]
