import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tenthsim.geometry import (Pose2D, normalize_angle, point_segment_distance,
                               segment_intersection)


class TestNormalizeAngle:
    def test_range_is_half_open(self):
        assert normalize_angle(math.pi) == pytest.approx(math.pi)
        assert normalize_angle(-math.pi) == pytest.approx(math.pi)
        assert normalize_angle(3 * math.pi) == pytest.approx(math.pi)

    @given(st.floats(-1000.0, 1000.0))
    def test_always_in_range(self, theta):
        th = normalize_angle(theta)
        assert -math.pi < th <= math.pi

    @given(st.floats(-100.0, 100.0))
    def test_equivalent_angle(self, theta):
        th = normalize_angle(theta)
        assert math.cos(th) == pytest.approx(math.cos(theta), abs=1e-9)
        assert math.sin(th) == pytest.approx(math.sin(theta), abs=1e-9)


class TestPose2D:
    def test_constructor_normalizes(self):
        assert Pose2D(0, 0, 4 * math.pi).theta == pytest.approx(0.0)

    def test_compose_identity(self):
        p = Pose2D(1.0, 2.0, 0.5)
        q = p.compose(Pose2D(0, 0, 0))
        assert (q.x, q.y, q.theta) == pytest.approx((p.x, p.y, p.theta))

    def test_transform_round_trip(self):
        p = Pose2D(3.0, -1.0, 1.2)
        local = np.array([0.7, -0.3])
        world = p.transform_point(local)
        back = p.inverse_transform_point(world)
        np.testing.assert_allclose(back, local, atol=1e-12)

    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-3, 3),
           st.floats(-5, 5), st.floats(-5, 5))
    def test_transform_preserves_distance(self, x, y, th, px, py):
        p = Pose2D(x, y, th)
        a = p.transform_point((px, py))
        b = p.transform_point((0.0, 0.0))
        assert np.hypot(*(a - b)) == pytest.approx(math.hypot(px, py), abs=1e-9)


class TestSegmentIntersection:
    def test_plain_crossing(self):
        t = segment_intersection((0, -1), (0, 1), (-1, 0), (1, 0))
        assert t == pytest.approx(0.5)

    def test_no_crossing(self):
        assert segment_intersection((0, -1), (0, -0.5), (-1, 0), (1, 0)) is None

    def test_parallel_returns_none(self):
        assert segment_intersection((0, 0), (1, 0), (0, 1), (1, 1)) is None

    def test_endpoint_graze_counts(self):
        # closed-segment rule: touching an endpoint is a crossing
        t = segment_intersection((1, -1), (1, 1), (-1, 0), (1, 0))
        assert t == pytest.approx(0.5)


def test_point_segment_distance():
    assert point_segment_distance((0, 1), (-1, 0), (1, 0)) == pytest.approx(1.0)
    assert point_segment_distance((5, 0), (-1, 0), (1, 0)) == pytest.approx(4.0)
    assert point_segment_distance((0, 0), (0, 0), (0, 0)) == pytest.approx(0.0)
