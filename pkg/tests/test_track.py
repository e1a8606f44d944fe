import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tenthsim.errors import PointTooFarError, TrackFormatError
from tenthsim.track import (Track, cartesian_to_frenet, frenet_to_cartesian,
                            load_centerline, polyline_curvature)


class TestLoadCenterline:
    def test_collinear_points(self):
        csv = "# x_m, y_m, w_tr_right_m, w_tr_left_m\n" + \
            "\n".join(f"{k}.0, 0.0, 1.0, 1.0" for k in range(4))
        track = load_centerline(csv)
        np.testing.assert_allclose(track.s, [0, 1, 2, 3])
        assert np.abs(track.kappa).max() < 1e-9
        assert not track.closed

    def test_regular_100gon(self):
        phi = np.linspace(0, 2 * np.pi, 100, endpoint=False)
        rows = [f"{10 * np.cos(p)}, {10 * np.sin(p)}, 1.0, 1.0" for p in phi]
        track = load_centerline("\n".join(rows))
        assert track.closed
        np.testing.assert_allclose(track.kappa, 0.1, atol=1e-3)
        assert track.total_length == pytest.approx(2 * np.pi * 10, rel=1e-3)

    def test_two_rows_error(self):
        with pytest.raises(TrackFormatError, match="at least 3"):
            load_centerline("0,0,1,1\n1,0,1,1\n")

    def test_duplicate_consecutive_error(self):
        with pytest.raises(TrackFormatError, match="duplicate"):
            load_centerline("0,0,1,1\n1,0,1,1\n1,0,1,1\n2,0,1,1\n")

    def test_repeated_first_point_closure_marker_ok(self):
        phi = np.linspace(0, 2 * np.pi, 20, endpoint=False)
        rows = [f"{np.cos(p)}, {np.sin(p)}, 0.3, 0.3" for p in phi]
        rows.append(rows[0])
        track = load_centerline("\n".join(rows))
        assert track.closed
        assert track.n_waypoints == 20

    def test_parse_failure(self):
        with pytest.raises(TrackFormatError):
            load_centerline("0,0,1,1\n1,zero,1,1\n2,0,1,1\n")


class TestCurvature:
    def test_sign_flips_on_reversal(self, ring_track):
        rev = ring_track.reversed()
        np.testing.assert_allclose(rev.kappa, -ring_track.kappa[::-1], atol=1e-9)

    def test_arclength_strictly_increasing(self, ring_track):
        assert (np.diff(ring_track.s) > 0).all()

    def test_polyline_helper_matches_track(self, ring_track):
        k = polyline_curvature(ring_track.xs, ring_track.ys, closed=True)
        np.testing.assert_allclose(k, ring_track.kappa)


class TestFrenet:
    def test_straight_track_identity(self, straight_track):
        s, d = cartesian_to_frenet(straight_track, (3.0, 0.5))
        assert (s, d) == pytest.approx((3.0, 0.5))

    def test_waypoint_projection(self, ring_track):
        k = 17
        s, d = cartesian_to_frenet(ring_track, (ring_track.xs[k], ring_track.ys[k]))
        assert s == pytest.approx(ring_track.s[k], abs=1e-9)
        assert d == pytest.approx(0.0, abs=1e-9)

    def test_circle_inside_is_negative_d(self, ring_track):
        # CCW ring: inside (smaller radius) lies to the left... the left
        # normal points toward the center, so radius 9 means d = +1.
        s, d = cartesian_to_frenet(ring_track, (9.0, 0.0))
        assert d == pytest.approx(1.0, abs=2e-3)
        s, d = cartesian_to_frenet(ring_track, (11.0, 0.0))
        assert d == pytest.approx(-1.0, abs=2e-3)

    def test_point_too_far(self, ring_track):
        with pytest.raises(PointTooFarError):
            cartesian_to_frenet(ring_track, (20.0, 20.0))

    def test_straight_frenet_to_cartesian(self, straight_track):
        pose = frenet_to_cartesian(straight_track, 2.0, 0.0)
        assert (pose.x, pose.y, pose.theta) == pytest.approx((2.0, 0.0, 0.0))

    def test_closed_track_wraps(self, ring_track):
        total = ring_track.total_length
        a = frenet_to_cartesian(ring_track, 1.0, 0.2)
        b = frenet_to_cartesian(ring_track, total + 1.0, 0.2)
        assert (a.x, a.y) == pytest.approx((b.x, b.y), abs=1e-12)

    def test_round_trip_random(self, ring_track):
        rng = np.random.default_rng(11)
        for _ in range(100):
            s = rng.uniform(0, ring_track.total_length)
            d = rng.uniform(-0.9, 0.9)
            pose = frenet_to_cartesian(ring_track, s, d)
            s2, d2 = cartesian_to_frenet(ring_track, (pose.x, pose.y))
            # the contract is positional: within 1e-6 m (s, d pairs near the
            # polygon vertices can shuffle between adjacent segments)
            pose2 = frenet_to_cartesian(ring_track, s2, d2)
            assert math.hypot(pose.x - pose2.x, pose.y - pose2.y) < 1e-6
            assert d2 == pytest.approx(d, abs=5e-4)

    def test_seeded_projection_matches_global(self, ring_track):
        rng = np.random.default_rng(4)
        s_prev = 5.0
        for _ in range(50):
            s_prev = (s_prev + rng.uniform(0, 0.5)) % ring_track.total_length
            d = rng.uniform(-0.8, 0.8)
            pose = frenet_to_cartesian(ring_track, s_prev, d)
            full = cartesian_to_frenet(ring_track, (pose.x, pose.y))
            hinted = cartesian_to_frenet(ring_track, (pose.x, pose.y),
                                         s_hint=s_prev)
            assert hinted == pytest.approx(full, abs=1e-12)

    def test_equidistant_tie_takes_smaller_s(self):
        # sharp 90-degree corner: the inner bisector point is equidistant
        xs = np.array([0.0, 1.0, 1.0])
        ys = np.array([0.0, 0.0, 1.0])
        track = Track.from_waypoints(xs, ys, 1.0, 1.0)
        s, d = cartesian_to_frenet(track, (0.9, 0.1))
        assert s == pytest.approx(0.9)
