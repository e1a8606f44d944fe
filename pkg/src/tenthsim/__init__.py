"""tenthsim: a deterministic 2D autonomous-racing simulator and autonomy stack.

The package is organized as a numpy-backed library: world geometry
(`geometry`, `gridmap`, `track`), vehicle models (`vehicle`, `dynamics`),
sensor simulation (`sensing`), the episodic engine (`engine`), Monte-Carlo
localization (`localization`), planners (`planning`), controllers
(`control`), and the race harness + CLI (`harness`).
"""

__version__ = "0.1.0"

from .geometry import Pose2D, normalize_angle
from .gridmap import FREE, OCCUPIED, UNKNOWN, OccupancyGridMap, load_map, load_map_files
from .track import (Track, cartesian_to_frenet, frenet_to_cartesian,
                    load_centerline, load_centerline_file)
from .vehicle import ControlInput, VehicleParams, VehicleState, load_vehicle_params
from .dynamics import dynamic_derivative, integrate_step, kinematic_derivative
from .sensing import GpsConfig, LaserScan, ScanSpec, gps_measure, simulate_scan
from .collision import (FootprintRect, StartLine, check_map_collision,
                        check_obb_collision, detect_line_crossing)
from .engine import AgentSetup, Engine, RewardSpec, SimConfig, StepResult
from .localization import (GaussianAround, GlobalUniform, LikelihoodField,
                           ParticleSet, build_likelihood_field, pf_init,
                           pf_update)
from .qpsolver import QpResult, solve_qp

__all__ = [
    "__version__",
    "Pose2D", "normalize_angle",
    "FREE", "OCCUPIED", "UNKNOWN", "OccupancyGridMap", "load_map", "load_map_files",
    "Track", "cartesian_to_frenet", "frenet_to_cartesian", "load_centerline",
    "load_centerline_file",
    "ControlInput", "VehicleParams", "VehicleState", "load_vehicle_params",
    "dynamic_derivative", "integrate_step", "kinematic_derivative",
    "GpsConfig", "LaserScan", "ScanSpec", "gps_measure", "simulate_scan",
    "FootprintRect", "StartLine", "check_map_collision", "check_obb_collision",
    "detect_line_crossing",
    "AgentSetup", "Engine", "RewardSpec", "SimConfig", "StepResult",
    "GaussianAround", "GlobalUniform", "LikelihoodField", "ParticleSet",
    "build_likelihood_field", "pf_init", "pf_update",
    "QpResult", "solve_qp",
]
