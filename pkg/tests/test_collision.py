import math

import numpy as np
import pytest

from tenthsim.collision import (BACKWARD, FORWARD, NONE, FootprintRect,
                                StartLine, check_map_collision,
                                check_obb_collision, detect_line_crossing)
from tenthsim.geometry import Pose2D
from tenthsim.gridmap import OCCUPIED, OccupancyGridMap


class TestObb:
    def test_identical_rects_collide(self):
        r = FootprintRect(1, 1, 0.3, 0.58, 0.31)
        assert check_obb_collision(r, r)

    def test_far_apart(self):
        a = FootprintRect(0, 0, 0.0, 1.0, 1.0)
        b = FootprintRect(10, 0, 0.7, 1.0, 1.0)
        assert not check_obb_collision(a, b)

    def test_touching_counts(self):
        a = FootprintRect(0, 0, 0.0, 1.0, 1.0)
        b = FootprintRect(1.0, 0, 0.0, 1.0, 1.0)
        assert check_obb_collision(a, b)

    def test_monte_carlo_containment_oracle(self):
        """500 random pairs vs point-sampling: no disagreement beyond the
        sampling tolerance (ambiguous thin overlaps are skipped)."""
        rng = np.random.default_rng(42)
        checked = 0
        for _ in range(500):
            a = FootprintRect(rng.uniform(-1, 1), rng.uniform(-1, 1),
                              rng.uniform(-math.pi, math.pi),
                              rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5))
            b = FootprintRect(rng.uniform(-1, 1), rng.uniform(-1, 1),
                              rng.uniform(-math.pi, math.pi),
                              rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5))
            claimed = check_obb_collision(a, b)
            # oracle: sample points densely inside a; any inside b => overlap
            nx = max(int(a.length / 0.01), 2)
            ny = max(int(a.width / 0.01), 2)
            u = np.linspace(-a.length / 2, a.length / 2, nx)
            v = np.linspace(-a.width / 2, a.width / 2, ny)
            uu, vv = np.meshgrid(u, v)
            c, s = math.cos(a.heading), math.sin(a.heading)
            pts = np.column_stack([a.cx + c * uu.ravel() - s * vv.ravel(),
                                   a.cy + s * uu.ravel() + c * vv.ravel()])
            sampled = bool(b.contains_points(pts).any())
            if claimed != sampled:
                # disagreement is only legal for grazing contact thinner
                # than the sampling grid
                assert claimed and not sampled
                gap = _min_corner_separation(a, b)
                assert gap < 0.02
            checked += 1
        assert checked == 500


def _min_corner_separation(a, b):
    pa = a.corners()
    pb = b.corners()
    d = np.inf
    for p in pa:
        d = min(d, np.min(np.hypot(pb[:, 0] - p[0], pb[:, 1] - p[1])))
    for p in pb:
        d = min(d, np.min(np.hypot(pa[:, 0] - p[0], pa[:, 1] - p[1])))
    return d


class TestMapCollision:
    def test_open_area_is_free(self, square_room):
        assert not check_map_collision(
            square_room, FootprintRect(10, 10, 0.5, 0.58, 0.31))

    def test_corner_just_inside_wall(self, square_room):
        # inner wall face at x = 19.75; footprint reaching 1 mm past it
        rect = FootprintRect(19.75 - 0.29 + 0.001, 10, 0.0, 0.58, 0.31)
        assert check_map_collision(square_room, rect)

    def test_fully_outside_counts_as_wall(self, square_room):
        assert check_map_collision(square_room, FootprintRect(50, 50, 0, 1, 1))

    def test_first_contact_within_one_cell_of_analytic(self, square_room):
        """Slide a footprint toward the wall: first hit within one cell."""
        res = square_room.resolution
        wall_x = 19.75  # analytic inner wall face
        length = 0.58
        first_hit = None
        xs = np.arange(18.5, 20.0, 0.005)
        for x in xs:
            if check_map_collision(square_room,
                                   FootprintRect(x, 10.0, 0.0, length, 0.31)):
                first_hit = x
                break
        assert first_hit is not None
        analytic = wall_x - length / 2
        assert abs(first_hit - analytic) <= res

    def test_shrinking_footprint_monotone(self, square_room):
        rng = np.random.default_rng(8)
        for _ in range(100):
            x, y = rng.uniform(1, 19, 2)
            th = rng.uniform(-math.pi, math.pi)
            big = FootprintRect(x, y, th, 1.0, 0.6)
            small = FootprintRect(x, y, th, 0.5, 0.3)
            if not check_map_collision(square_room, big):
                assert not check_map_collision(square_room, small)


class TestLineCrossing:
    LINE = StartLine.from_points((0, -1), (0, 1), (1, 0))

    def test_forward(self):
        assert detect_line_crossing((-0.5, 0), (0.5, 0), self.LINE) == FORWARD

    def test_backward(self):
        assert detect_line_crossing((0.5, 0.2), (-0.5, 0.2), self.LINE) == BACKWARD

    def test_parallel_no_touch(self):
        assert detect_line_crossing((1, -2), (1, 2), self.LINE) == NONE

    def test_miss_beyond_endpoint(self):
        assert detect_line_crossing((-0.5, 1.5), (0.5, 1.5), self.LINE) == NONE

    def test_endpoint_graze_counts(self):
        assert detect_line_crossing((-0.5, 1.0), (0.5, 1.0), self.LINE) == FORWARD

    def test_no_motion(self):
        assert detect_line_crossing((0.0, 0.0), (0.0, 0.0), self.LINE) == NONE
