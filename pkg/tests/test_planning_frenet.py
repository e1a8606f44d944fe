import numpy as np
import pytest

from tenthsim.collision import FootprintRect
from tenthsim.planning.frenet import (FrenetConfig, QuarticPolynomial,
                                      QuinticPolynomial, frenet_candidates,
                                      frenet_select)
from tenthsim.track import cartesian_to_frenet
from tenthsim.vehicle import VehicleParams, VehicleState

PARAMS = VehicleParams()
CFG = FrenetConfig(target_speed=3.0)


class TestPolynomials:
    def test_quintic_boundary_conditions(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            x0, v0, a0, xt, vt, at = rng.uniform(-3, 3, 6)
            t_end = rng.uniform(0.5, 3.0)
            p = QuinticPolynomial(x0, v0, a0, xt, vt, at, t_end)
            assert p.value(0.0) == pytest.approx(x0, abs=1e-9)
            assert p.deriv1(0.0) == pytest.approx(v0, abs=1e-9)
            assert p.deriv2(0.0) == pytest.approx(a0, abs=1e-9)
            assert p.value(t_end) == pytest.approx(xt, abs=1e-9)
            assert p.deriv1(t_end) == pytest.approx(vt, abs=1e-9)
            assert p.deriv2(t_end) == pytest.approx(at, abs=1e-9)

    def test_quartic_boundary_conditions(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            x0, v0, a0, vt, at = rng.uniform(-3, 3, 5)
            t_end = rng.uniform(0.5, 3.0)
            p = QuarticPolynomial(x0, v0, a0, vt, at, t_end)
            assert p.value(0.0) == pytest.approx(x0, abs=1e-9)
            assert p.deriv1(0.0) == pytest.approx(v0, abs=1e-9)
            assert p.deriv1(t_end) == pytest.approx(vt, abs=1e-9)

    def test_jerk_integral_matches_quadrature(self):
        p = QuinticPolynomial(0.0, 0.5, -0.2, 1.5, 0.0, 0.0, 2.0)
        ts = np.linspace(0, 2.0, 20001)
        numeric = np.trapezoid(p.deriv3(ts) ** 2, ts)
        assert p.jerk_squared_integral(2.0) == pytest.approx(numeric, rel=1e-6)


class TestCandidates:
    def test_candidate_count(self, ring_track):
        state = VehicleState(x=10.0, y=0.0, theta=np.pi / 2, v=2.0)
        cands = frenet_candidates(state, ring_track, PARAMS, CFG)
        assert len(cands) == CFG.n_goal_offsets * len(CFG.horizons)

    def test_zero_offset_zero_lateral_jerk(self, ring_track):
        """From d=0, d_dot=0 the d_f=0 candidate has no lateral jerk cost.

        The heading must match the local chord tangent of the polygonal
        centerline, otherwise d_dot != 0 and the quintic carries jerk.
        """
        from tenthsim.track import track_pose_at
        pose = track_pose_at(ring_track, 0.05)
        state = VehicleState(x=pose.x, y=pose.y, theta=pose.theta, v=3.0)
        cfg = FrenetConfig(target_speed=3.0, n_goal_offsets=7)
        cands = frenet_candidates(state, ring_track, PARAMS, cfg)
        center = min(cands, key=lambda c: c.cost)
        # straight-along-track candidate wins on cost and its lateral motion
        # carries no jerk: cost reduces to the k_t and k_v terms
        t_end = min(cfg.horizons)
        expected = cfg.k_time * t_end
        assert center.cost == pytest.approx(expected, abs=1e-6)

    def test_round_trip_of_candidate_points(self, ring_track):
        state = VehicleState(x=10.0, y=0.0, theta=np.pi / 2, v=2.0)
        cands = frenet_candidates(state, ring_track, PARAMS, CFG)
        cand = cands[len(cands) // 2]
        for x, y in cand.as_xy()[1::5]:
            s, d = cartesian_to_frenet(ring_track, (x, y))
            assert abs(d) <= 1.0  # stays within the track


class TestSelect:
    def test_no_obstacles_prefers_centerline(self, ring_track):
        state = VehicleState(x=10.0, y=0.0, theta=np.pi / 2, v=3.0)
        cands = frenet_candidates(state, ring_track, PARAMS, CFG)
        best = frenet_select(cands, None, [], PARAMS, CFG)
        assert best.flag == ""
        # the winner is the min-cost candidate with d_f ~ 0: its endpoint
        # projects to a small lateral offset
        _, d_end = cartesian_to_frenet(ring_track, (best.xs[-1], best.ys[-1]))
        assert abs(d_end) < 0.1

    def test_obstacle_forces_lateral_goal(self, ring_track):
        state = VehicleState(x=10.0, y=0.0, theta=np.pi / 2, v=3.0)
        cands = frenet_candidates(state, ring_track, PARAMS, CFG)
        s0, _ = cartesian_to_frenet(ring_track, (10.0, 0.0))
        from tenthsim.track import frenet_to_cartesian
        block = frenet_to_cartesian(ring_track, s0 + 3.0, 0.0)
        opp = [FootprintRect(block.x, block.y, block.theta, 0.9, 0.5)]
        best = frenet_select(cands, None, opp, PARAMS, CFG)
        assert best.flag == ""
        _, d_end = cartesian_to_frenet(ring_track, (best.xs[-1], best.ys[-1]))
        assert abs(d_end) > 0.25  # swerved beyond the obstacle half-width

    def test_all_blocked_gives_infeasible_fallback(self, ring_track):
        state = VehicleState(x=10.0, y=0.0, theta=np.pi / 2, v=3.0)
        cands = frenet_candidates(state, ring_track, PARAMS, CFG)
        # wall of obstacles across the whole drivable width just ahead
        s0, _ = cartesian_to_frenet(ring_track, (10.0, 0.0))
        from tenthsim.track import frenet_to_cartesian
        opps = []
        for d in np.linspace(-0.9, 0.9, 7):
            for ds in (1.0, 2.0, 3.0, 4.5, 6.0):
                p = frenet_to_cartesian(ring_track, s0 + ds, d)
                opps.append(FootprintRect(p.x, p.y, p.theta, 1.2, 0.6))
        best = frenet_select(cands, None, opps, PARAMS, CFG)
        assert best.flag == "INFEASIBLE"
        assert best.vs[-1] == pytest.approx(0.0)  # braking profile

    def test_speed_cap_discards(self, ring_track):
        state = VehicleState(x=10.0, y=0.0, theta=np.pi / 2, v=3.0)
        fast = FrenetConfig(target_speed=25.0)  # beyond v_max=16.7 midway? no:
        cands = frenet_candidates(state, ring_track, PARAMS, fast)
        slow_params = PARAMS.override(v_max=4.0)
        best = frenet_select(cands, None, [], slow_params, fast)
        # every candidate exceeds v_max=4 -> fallback flagged
        assert best.flag == "INFEASIBLE"
