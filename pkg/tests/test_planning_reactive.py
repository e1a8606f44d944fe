import numpy as np
import pytest

from tenthsim.planning.reactive import (GapFollowerConfig, aeb_should_brake,
                                        follow_the_gap)
from tenthsim.sensing import LaserScan

FOV = 4.712


def scan_from(ranges):
    return LaserScan(ranges=np.asarray(ranges, dtype=float), fov=FOV)


class TestAeb:
    def test_no_braking_at_rest(self):
        scan = scan_from(np.full(100, 0.3))
        assert not aeb_should_brake(scan, v=0.0)

    def test_wall_one_meter_ahead(self):
        """v=4 against a 1 m wall: iTTC = 0.25 < 0.5 -> brake."""
        n = 101
        scan = scan_from(np.full(n, 1.0))
        assert aeb_should_brake(scan, v=4.0, threshold_s=0.5)

    def test_itc_arithmetic_boundary(self):
        n = 101
        scan = scan_from(np.full(n, 10.0))
        # forward beam: iTTC = 10/4 = 2.5 > 0.5 -> no braking
        assert not aeb_should_brake(scan, v=4.0, threshold_s=0.5)

    def test_wall_behind_is_ignored(self):
        n = 1080
        ranges = np.full(n, 30.0)
        scan = LaserScan(ranges=ranges, fov=FOV)
        behind = np.abs(np.cos(scan.angles)) < 1e-12
        backward = np.cos(scan.angles) < 0
        ranges[backward] = 0.05  # wall essentially touching, behind only
        assert not aeb_should_brake(LaserScan(ranges=ranges, fov=FOV), v=5.0)


class TestFollowTheGap:
    CFG = GapFollowerConfig()

    def test_deep_left_shallow_right(self):
        n = 100
        ranges = np.concatenate([np.full(n // 2, 0.5), np.full(n // 2, 10.0)])
        # index 0 is the rightmost beam, so deep beams (left) sit at high idx
        cmd = follow_the_gap(scan_from(ranges), self.CFG)
        assert cmd.steer > 0.0
        assert not cmd.no_gap

    def test_symmetric_corridor_steers_straight(self):
        n = 101
        cmd = follow_the_gap(scan_from(np.full(n, 5.0)), self.CFG)
        assert cmd.steer == pytest.approx(0.0)
        assert cmd.speed == pytest.approx(self.CFG.v_straight)

    def test_no_gap(self):
        cmd = follow_the_gap(scan_from(np.full(50, 0.4)), self.CFG)
        assert cmd.no_gap
        assert cmd.steer == 0.0 and cmd.speed == 0.0

    def test_speed_drops_with_steering(self):
        n = 100
        ranges = np.concatenate([np.full(n // 2, 0.5), np.full(n // 2, 10.0)])
        cmd = follow_the_gap(scan_from(ranges), self.CFG)
        assert cmd.speed < self.CFG.v_straight

    def test_scaling_invariance_above_threshold(self):
        """Uniform scaling of all ranges (while above threshold and below
        clipping) must not change the selected steering."""
        rng = np.random.default_rng(0)
        base = rng.uniform(2.0, 4.0, 180)
        base[60:80] = rng.uniform(1.6, 1.8, 20)
        cfg = GapFollowerConfig(max_clip=1000.0)
        a = follow_the_gap(scan_from(base), cfg)
        b = follow_the_gap(scan_from(base * 2.0), cfg)
        assert a.steer == pytest.approx(b.steer)

    def test_bubble_blanks_nearest_obstacle(self):
        n = 181
        ranges = np.full(n, 5.0)
        ranges[90] = 0.8  # obstacle dead ahead
        cmd = follow_the_gap(scan_from(ranges), self.CFG)
        assert abs(cmd.steer) > 0.05  # steered away from center
