"""Single-track vehicle model walkthrough: turning circles and model blending.

Run: python demos/demo_dynamics.py
"""

import math

import numpy as np

from tenthsim import ControlInput, VehicleParams, VehicleState
from tenthsim.dynamics import dynamic_derivative, integrate_step, kinematic_derivative

params = VehicleParams()
print("1:10-scale defaults:", f"wheelbase={params.wheelbase_l} m,",
      f"mass={params.mass} kg, v_max={params.v_max} m/s, a_max={params.a_max} m/s^2")

# --- kinematic turning circle -------------------------------------------------
delta = 0.3
state = VehicleState(v=0.4, delta=delta)
positions = []
for _ in range(4000):
    state = integrate_step(state, ControlInput(), params, 0.01)
    positions.append((state.x - params.lr * math.cos(state.theta),
                      state.y - params.lr * math.sin(state.theta)))
rear = np.array(positions[500:])
center = rear.mean(axis=0)
radius = np.hypot(*(rear - center).T).mean()
print(f"\nconstant steering {delta} rad at 0.4 m/s:")
print(f"  rear-axle circle radius = {radius:.4f} m")
print(f"  closed form L/tan(delta) = {params.wheelbase_l / math.tan(delta):.4f} m")

# --- understeer at speed ------------------------------------------------------
print("\nsteady-state yaw rate vs the kinematic prediction:")
for v in (2.0, 4.0, 8.0):
    s = np.array([0, 0, 0.15, v, 0, 0, 0.0])
    from tenthsim.dynamics import params_array, rk4_step
    pa = params_array(params)
    u = np.zeros(2)
    for _ in range(4000):
        s = rk4_step(s, u, pa, 0.01)
    beta_k = math.atan(params.lr * math.tan(0.15) / params.wheelbase_l)
    omega_kin = v * math.cos(beta_k) * math.tan(0.15) / params.wheelbase_l
    print(f"  v={v:4.1f} m/s: dynamic {s[5]:.3f} rad/s vs kinematic "
          f"{omega_kin:.3f} rad/s (ratio {s[5] / omega_kin:.3f}, "
          f"a_lat {v * s[5]:.1f} m/s^2)")

# --- low-speed guard ----------------------------------------------------------
print("\nthe dynamic model alone is undefined below 0.5 m/s:")
try:
    dynamic_derivative(VehicleState(v=0.2), ControlInput(), params)
except Exception as exc:
    print(f"  {type(exc).__name__}: {exc}")
d = kinematic_derivative(VehicleState(v=0.2, delta=0.2), ControlInput(), params)
print(f"  kinematic derivative still fine: theta_dot = {d.theta:.4f} rad/s")
