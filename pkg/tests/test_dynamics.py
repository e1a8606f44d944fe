import math

import numpy as np
import pytest

from tenthsim.dynamics import (DT_MAX, dynamic_derivative, integrate_step,
                               kinematic_derivative, params_array, rk4_step)
from tenthsim.errors import DomainError, NonFiniteStateError
from tenthsim.vehicle import ControlInput, VehicleParams, VehicleState

PARAMS = VehicleParams()


class TestKinematicDerivative:
    def test_straight_rolling(self):
        d = kinematic_derivative(VehicleState(v=1.0), ControlInput(), PARAMS)
        assert d.x == pytest.approx(1.0)
        for value in (d.y, d.delta, d.v, d.theta, d.theta_dot, d.beta):
            assert value == pytest.approx(0.0)

    def test_stationary_any_steering(self):
        d = kinematic_derivative(VehicleState(v=0.0, delta=0.3), ControlInput(),
                                 PARAMS)
        assert (d.x, d.y, d.theta) == pytest.approx((0.0, 0.0, 0.0))

    def test_turning_radius_closed_form(self):
        """Constant delta=0.3 traces a rear-axle circle of radius L/tan(delta).

        v = 0.4 m/s keeps the integration in the purely kinematic regime.
        """
        delta = 0.3
        state = VehicleState(v=0.4, delta=delta)
        expected_r = PARAMS.wheelbase_l / math.tan(delta)
        lap_steps = round(2 * math.pi * expected_r / 0.4 / 0.01)
        rear = []
        for _ in range(lap_steps + 200):
            state = integrate_step(state, ControlInput(), PARAMS, 0.01)
            rear.append((state.x - PARAMS.lr * math.cos(state.theta),
                         state.y - PARAMS.lr * math.sin(state.theta)))
        rear = np.array(rear[200:])
        center = rear.mean(axis=0)
        radii = np.hypot(rear[:, 0] - center[0], rear[:, 1] - center[1])
        assert radii.mean() == pytest.approx(expected_r, rel=0.01)


class TestDynamicDerivative:
    def test_straight_equilibrium(self):
        d = dynamic_derivative(VehicleState(v=5.0), ControlInput(), PARAMS)
        assert d.theta_dot == pytest.approx(0.0)
        assert d.beta == pytest.approx(0.0)

    def test_low_speed_domain_error(self):
        with pytest.raises(DomainError):
            dynamic_derivative(VehicleState(v=0.3), ControlInput(), PARAMS)

    @pytest.mark.parametrize("delta,v", [(0.05, 2.0), (0.1, 2.5)])
    def test_steady_state_matches_kinematic(self, delta, v):
        """At low lateral accel the two models' yaw rates agree within 10%."""
        x = np.array([0, 0, delta, v, 0, 0, 0], dtype=float)
        u = np.zeros(2)
        pa = params_array(PARAMS)
        for _ in range(3000):
            x = rk4_step(x, u, pa, 0.01)
        a_lat = v * x[5]
        assert abs(a_lat) < 0.3 * PARAMS.mu * 9.81
        beta_k = math.atan(PARAMS.lr * math.tan(delta) / PARAMS.wheelbase_l)
        omega_kin = v * math.cos(beta_k) * math.tan(delta) / PARAMS.wheelbase_l
        assert x[5] == pytest.approx(omega_kin, rel=0.10)

    def test_mirror_symmetry(self):
        """Left-right mirroring negates the slip and yaw dynamics exactly.

        The tire-force terms are jointly odd in (delta, beta, yaw rate), for
        any parameters and any longitudinal acceleration.
        """
        params = PARAMS.override(cf=4.0, cr=6.0, lf=0.14)
        state = VehicleState(v=4.0, delta=0.2, theta_dot=0.5, beta=0.05)
        mirrored = VehicleState(v=4.0, delta=-0.2, theta_dot=-0.5, beta=-0.05)
        u = ControlInput(0.0, 2.0)
        da = dynamic_derivative(state, u, params)
        db = dynamic_derivative(mirrored, u, params)
        assert da.beta == pytest.approx(-db.beta, abs=1e-12)
        assert da.theta_dot == pytest.approx(-db.theta_dot, abs=1e-12)

    def test_symmetric_car_axle_swap_is_identity(self):
        """For cf=cr, lf=lr the axle swap maps the car to itself, so the
        mirrored-steering response must mirror beta exactly."""
        params = PARAMS.override(cf=5.0, cr=5.0, lf=PARAMS.wheelbase_l / 2)
        state = VehicleState(v=3.0, delta=0.15, theta_dot=0.2, beta=0.02)
        mirrored = VehicleState(v=3.0, delta=-0.15, theta_dot=-0.2, beta=-0.02)
        da = dynamic_derivative(state, ControlInput(), params)
        db = dynamic_derivative(mirrored, ControlInput(), params)
        assert da.beta == pytest.approx(-db.beta, abs=1e-12)


class TestIntegrateStep:
    def test_rest_is_fixed_point(self):
        state = VehicleState()
        out = integrate_step(state, ControlInput(), PARAMS, 0.01)
        assert out == state

    def test_dt_bounds(self):
        with pytest.raises(DomainError):
            integrate_step(VehicleState(), ControlInput(), PARAMS, 0.05)
        with pytest.raises(DomainError):
            integrate_step(VehicleState(), ControlInput(), PARAMS, 0.0)

    def test_speed_clamps_at_v_max(self):
        state = VehicleState(v=PARAMS.v_max)
        out = integrate_step(state, ControlInput(0.0, PARAMS.a_max), PARAMS, 0.01)
        assert out.v == PARAMS.v_max

    def test_steering_clamps_at_delta_max(self):
        state = VehicleState(delta=PARAMS.delta_max, v=2.0)
        out = integrate_step(state, ControlInput(PARAMS.steer_rate_max, 0.0),
                             PARAMS, 0.01)
        assert out.delta == PARAMS.delta_max

    def test_inputs_clamped_before_integration(self):
        out1 = integrate_step(VehicleState(), ControlInput(0.0, 100.0), PARAMS, 0.01)
        out2 = integrate_step(VehicleState(), ControlInput(0.0, PARAMS.a_max),
                              PARAMS, 0.01)
        assert out1 == out2

    def test_non_finite_input_rejected(self):
        with pytest.raises(DomainError):
            integrate_step(VehicleState(), ControlInput(float("nan"), 0.0),
                           PARAMS, 0.01)

    def test_determinism_bitwise(self):
        state = VehicleState(x=1, y=2, delta=0.1, v=3, theta=0.4)
        u = ControlInput(0.5, 1.0)
        a = integrate_step(state, u, PARAMS, 0.01)
        b = integrate_step(state, u, PARAMS, 0.01)
        assert a.as_array().tobytes() == b.as_array().tobytes()

    def test_rk4_convergence_order(self):
        """Richardson order estimate on a clothoid (constant inputs) >= 3.8."""
        pa = params_array(PARAMS)
        u = np.array([0.2, 0.5])

        def run(dt, t_final=1.6):
            x = np.array([0, 0, 0.0, 5.0, 0, 0, 0], dtype=float)
            for _ in range(round(t_final / dt)):
                x = rk4_step(x, u, pa, dt)
            return x

        ref = run(0.0001)
        errs = [np.linalg.norm(run(dt)[:2] - ref[:2])
                for dt in (0.01, 0.005, 0.0025)]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert min(orders) >= 3.8

    def test_halving_dt_agrees_on_straight(self):
        s1 = integrate_step(VehicleState(v=2.0), ControlInput(0, 1.0), PARAMS, 0.01)
        s2 = VehicleState(v=2.0)
        for _ in range(2):
            s2 = integrate_step(s2, ControlInput(0, 1.0), PARAMS, 0.005)
        assert s2.x == pytest.approx(s1.x, abs=1e-9)
        assert s2.v == pytest.approx(s1.v, abs=1e-12)
