"""Vehicle parameters, state, and control input types.

Default parameters describe a 1:10-scale car. They are implementation
defaults, not measured values, and every field can be overridden from a
config file or scenario.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

import numpy as np

from .geometry import normalize_angle

GRAVITY = 9.81

# State vector layout used by the integrator.
SX, SY, SDELTA, SV, STHETA, STHETADOT, SBETA = range(7)


@dataclass(frozen=True)
class VehicleParams:
    """Geometric and tire parameters of a single-track vehicle model."""

    wheelbase_l: float = 0.3302
    lf: float = 0.1562
    mass: float = 3.74
    yaw_inertia: float = 0.0479
    cf: float = 4.718          # cornering stiffness coefficient, per rad
    cr: float = 4.718
    mu: float = 1.05
    cog_height: float = 0.074
    width: float = 0.31
    length: float = 0.58
    delta_max: float = 0.4189
    steer_rate_max: float = 3.2
    v_max: float = 16.7
    a_max: float = 15.0

    def __post_init__(self):
        positive = ["wheelbase_l", "lf", "mass", "yaw_inertia", "cf", "cr", "mu",
                    "cog_height", "width", "length", "delta_max", "steer_rate_max",
                    "v_max", "a_max"]
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.lf >= self.wheelbase_l:
            raise ValueError("lf must be smaller than the wheelbase")

    @property
    def lr(self) -> float:
        return self.wheelbase_l - self.lf

    @property
    def kappa_max(self) -> float:
        """Tightest curvature the steering geometry can command."""
        return float(np.tan(self.delta_max) / self.wheelbase_l)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "VehicleParams":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown vehicle parameter(s): {sorted(unknown)}")
        return cls(**data)

    def override(self, **kwargs) -> "VehicleParams":
        return replace(self, **kwargs)


def load_vehicle_params(path) -> VehicleParams:
    """Read parameters from a JSON or `key: value` plain-text file."""
    with open(path, "r") as f:
        text = f.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return VehicleParams.from_dict(json.loads(text))
    data = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = ":" if ":" in line else "="
        key, _, value = line.partition(sep)
        data[key.strip()] = float(value.strip())
    return VehicleParams.from_dict(data)


@dataclass(frozen=True)
class VehicleState:
    """Full pose/velocity state of one agent.

    theta is the yaw angle (normalized), beta the slip angle at the CoG,
    delta the front steering angle.
    """

    x: float = 0.0
    y: float = 0.0
    delta: float = 0.0
    v: float = 0.0
    theta: float = 0.0
    theta_dot: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.delta, self.v, self.theta,
                         self.theta_dot, self.beta])

    @classmethod
    def from_array(cls, arr) -> "VehicleState":
        a = np.asarray(arr, dtype=float)
        return cls(x=a[SX], y=a[SY], delta=a[SDELTA], v=a[SV], theta=a[STHETA],
                   theta_dot=a[STHETADOT], beta=a[SBETA])


@dataclass(frozen=True)
class ControlInput:
    """Plant inputs: steering rate (rad/s) and longitudinal accel (m/s^2)."""

    steer_rate: float = 0.0
    accel: float = 0.0

    def clamped(self, params: VehicleParams) -> "ControlInput":
        sr = min(max(self.steer_rate, -params.steer_rate_max), params.steer_rate_max)
        a = min(max(self.accel, -params.a_max), params.a_max)
        return ControlInput(steer_rate=sr, accel=a)

    def as_array(self) -> np.ndarray:
        return np.array([self.steer_rate, self.accel])
