"""Single-track vehicle models and deterministic RK4 integration.

Two models share one state vector: a kinematic bicycle (CoG-referenced, with
geometric slip angle) and a dynamic bicycle with linear tire forces. The
dynamic model divides by v, so the integrator blends the two derivatives
linearly over the band 0.5..1.5 m/s and uses the kinematic model alone below
it.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, NonFiniteStateError
from .vehicle import ControlInput, VehicleParams, VehicleState

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

V_BLEND_LO = 0.5
V_BLEND_HI = 1.5
DT_MAX = 0.02

# Parameter vector layout consumed by the jitted kernels.
PL, PLF, PLR, PMASS, PIZ, PCF, PCR, PMU, PH, PDMAX, PSRMAX, PVMAX, PAMAX = range(13)


def params_array(params: VehicleParams) -> np.ndarray:
    return np.array([params.wheelbase_l, params.lf, params.lr, params.mass,
                     params.yaw_inertia, params.cf, params.cr, params.mu,
                     params.cog_height, params.delta_max, params.steer_rate_max,
                     params.v_max, params.a_max])


@njit(cache=True)
def _kinematic_deriv(x, u, p, out):
    lwb = p[PL]
    lr = p[PLR]
    v = x[3]
    delta = x[2]
    tan_d = math.tan(delta)
    beta_k = math.atan(lr * tan_d / lwb)
    cos_b = math.cos(beta_k)
    out[0] = v * math.cos(x[4] + beta_k)
    out[1] = v * math.sin(x[4] + beta_k)
    out[2] = u[0]
    out[3] = u[1]
    out[4] = v * cos_b * tan_d / lwb
    # Time derivatives of the yaw-rate and slip states along the kinematic
    # solution, so the blended model stays consistent.
    cos_d2 = math.cos(delta) ** 2
    dbeta = (lr * u[0] / (lwb * cos_d2)) / (1.0 + (lr * tan_d / lwb) ** 2)
    out[5] = (u[1] * cos_b * tan_d
              - v * math.sin(beta_k) * dbeta * tan_d
              + v * cos_b * u[0] / cos_d2) / lwb
    out[6] = dbeta
    return out


@njit(cache=True)
def _dynamic_deriv(x, u, p, out):
    g = 9.81
    lf = p[PLF]
    lr = p[PLR]
    m = p[PMASS]
    iz = p[PIZ]
    cf = p[PCF]
    cr = p[PCR]
    mu = p[PMU]
    h = p[PH]
    lwb = lf + lr
    delta = x[2]
    v = x[3]
    theta = x[4]
    wz = x[5]
    beta = x[6]
    a = u[1]

    ff = cf * (g * lr - a * h)   # front axle load term
    fr = cr * (g * lf + a * h)   # rear axle load term

    out[0] = v * math.cos(theta + beta)
    out[1] = v * math.sin(theta + beta)
    out[2] = u[0]
    out[3] = a
    out[4] = wz
    out[5] = (mu * m / (iz * lwb)) * (
        lf * ff * delta + (lr * fr - lf * ff) * beta
        - (lf * lf * ff + lr * lr * fr) * wz / v)
    out[6] = (mu / (v * lwb)) * (
        ff * delta - (fr + ff) * beta + (fr * lr - ff * lf) * wz / v) - wz
    return out


@njit(cache=True)
def _blended_deriv(x, u, p, out):
    v = abs(x[3])
    if v <= V_BLEND_LO:
        return _kinematic_deriv(x, u, p, out)
    if v >= V_BLEND_HI:
        return _dynamic_deriv(x, u, p, out)
    w = (v - V_BLEND_LO) / (V_BLEND_HI - V_BLEND_LO)
    kin = np.empty(7)
    dyn = np.empty(7)
    _kinematic_deriv(x, u, p, kin)
    _dynamic_deriv(x, u, p, dyn)
    for i in range(7):
        out[i] = (1.0 - w) * kin[i] + w * dyn[i]
    return out


@njit(cache=True)
def rk4_step(x, u, p, dt):
    """One fixed-step RK4 update of the blended model, with output clamps."""
    k1 = np.empty(7)
    k2 = np.empty(7)
    k3 = np.empty(7)
    k4 = np.empty(7)
    tmp = np.empty(7)

    _blended_deriv(x, u, p, k1)
    for i in range(7):
        tmp[i] = x[i] + 0.5 * dt * k1[i]
    _blended_deriv(tmp, u, p, k2)
    for i in range(7):
        tmp[i] = x[i] + 0.5 * dt * k2[i]
    _blended_deriv(tmp, u, p, k3)
    for i in range(7):
        tmp[i] = x[i] + dt * k3[i]
    _blended_deriv(tmp, u, p, k4)

    out = np.empty(7)
    for i in range(7):
        out[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

    if out[2] > p[PDMAX]:
        out[2] = p[PDMAX]
    elif out[2] < -p[PDMAX]:
        out[2] = -p[PDMAX]
    if out[3] > p[PVMAX]:
        out[3] = p[PVMAX]
    elif out[3] < -p[PVMAX]:
        out[3] = -p[PVMAX]
    # Wrap yaw to (-pi, pi].
    th = out[4] % (2.0 * math.pi)
    if th > math.pi:
        th -= 2.0 * math.pi
    out[4] = th
    return out


def kinematic_derivative(state: VehicleState, control: ControlInput,
                         params: VehicleParams) -> VehicleState:
    """Kinematic bicycle state derivative (fields of the result are rates)."""
    out = np.empty(7)
    _kinematic_deriv(state.as_array(), _clamped_input(control, params),
                     params_array(params), out)
    return _deriv_result(out)


def dynamic_derivative(state: VehicleState, control: ControlInput,
                       params: VehicleParams) -> VehicleState:
    """Linear-tire single-track state derivative. Requires |v| >= 0.5 m/s."""
    if abs(state.v) < V_BLEND_LO:
        raise DomainError(
            f"dynamic model undefined below {V_BLEND_LO} m/s (v={state.v}); "
            "use integrate_step, which blends with the kinematic model")
    out = np.empty(7)
    _dynamic_deriv(state.as_array(), _clamped_input(control, params),
                   params_array(params), out)
    return _deriv_result(out)


def integrate_step(state: VehicleState, control: ControlInput,
                   params: VehicleParams, dt: float) -> VehicleState:
    """Advance the blended model one RK4 step of dt seconds.

    Inputs are clamped to the actuator limits before integration; steering
    angle and speed are clamped to their bounds after. dt must lie in
    (0, 0.02].
    """
    if not 0.0 < dt <= DT_MAX:
        raise DomainError(f"dt must be in (0, {DT_MAX}], got {dt}")
    u = _clamped_input(control, params)
    if not np.all(np.isfinite(u)):
        raise DomainError(f"control input not finite: {u}")
    out = rk4_step(state.as_array(), u, params_array(params), dt)
    if not np.all(np.isfinite(out)):
        raise NonFiniteStateError(f"integration produced non-finite state: {out}")
    return VehicleState.from_array(out)


def _clamped_input(control: ControlInput, params: VehicleParams) -> np.ndarray:
    return np.array([
        float(np.clip(control.steer_rate, -params.steer_rate_max, params.steer_rate_max)),
        float(np.clip(control.accel, -params.a_max, params.a_max)),
    ])


def _deriv_result(out: np.ndarray) -> VehicleState:
    state = VehicleState.__new__(VehicleState)
    for name, value in zip(("x", "y", "delta", "v", "theta", "theta_dot", "beta"), out):
        object.__setattr__(state, name, float(value))
    return state
