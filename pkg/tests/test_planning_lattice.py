import itertools

import numpy as np
import pytest

from tenthsim.errors import DomainError
from tenthsim.planning.lattice import (LatticeConfig, OpponentTrack,
                                       build_lattice_graph, graph_plan)
from tenthsim.track import Track, cartesian_to_frenet, track_pose_at
from tenthsim.vehicle import VehicleParams, VehicleState

PARAMS = VehicleParams()
CFG = LatticeConfig(layer_ds=2.0, n_lanes=3, vehicle_width=0.31)


@pytest.fixture(scope="module")
def graph(ring_track):
    return build_lattice_graph(ring_track, PARAMS, CFG)


class TestBuild:
    def test_layer_and_node_counts(self, graph, ring_track):
        expected_layers = int(ring_track.total_length // CFG.layer_ds)
        assert graph.n_layers == expected_layers
        assert graph.node_xy.shape == (expected_layers, 3, 2)
        # every layer connects to the next with |lane change| <= 1
        max_edges = expected_layers * (3 * 3 - 2)  # 7 = 3x3 minus two corners
        assert 0 < len(graph.edges) <= max_edges

    def test_open_track_rejected(self, straight_track):
        with pytest.raises(DomainError):
            build_lattice_graph(straight_track, PARAMS, CFG)

    def test_edge_boundary_conditions(self, graph, ring_track):
        """Edge primitives start and end exactly on their nodes."""
        for (layer, i, j), edge in itertools.islice(graph.edges.items(), 40):
            start = graph.node_xy[layer, i]
            end = graph.node_xy[(layer + 1) % graph.n_layers, j]
            np.testing.assert_allclose(edge.points[0], start, atol=1e-9)
            np.testing.assert_allclose(edge.points[-1], end, atol=1e-6)

    def test_edges_pruned_against_wall(self, ring_track):
        """A map with a plug across the outer lanes removes those edges."""
        from tenthsim.geometry import Pose2D
        from tenthsim.gridmap import FREE, OCCUPIED, OccupancyGridMap

        cells = np.full((560, 560), OCCUPIED, dtype=np.uint8)
        yy, xx = np.mgrid[0:560, 0:560]
        wx = (xx + 0.5) * 0.05 - 14.0
        wy = (yy + 0.5) * 0.05 - 14.0
        r = np.hypot(wx, wy)
        cells[(r > 9.0) & (r < 11.0)] = FREE
        # plug everything except the innermost band at one angular slot
        ang = np.arctan2(wy, wx)
        plug = (np.abs(ang - 0.8) < 0.05) & (r > 9.8)
        cells[plug] = OCCUPIED
        grid = OccupancyGridMap(resolution=0.05, origin=Pose2D(-14, -14, 0),
                                cells=cells)
        pruned = build_lattice_graph(ring_track, PARAMS, CFG, grid=grid)
        assert len(pruned.edges) < len(
            build_lattice_graph(ring_track, PARAMS, CFG).edges)


class TestPlan:
    def start_state(self, ring_track, s=0.3):
        pose = track_pose_at(ring_track, s)
        return VehicleState(x=pose.x, y=pose.y, theta=pose.theta, v=2.0)

    def test_empty_track_follows_min_cost(self, graph, ring_track):
        state = self.start_state(ring_track)
        traj = graph_plan(graph, state, [], params=PARAMS)
        assert traj.flag == ""
        # with no opponents the cheapest route on a ring stays in one lane;
        # all sampled points remain inside the track
        for x, y in traj.as_xy()[::7]:
            _, d = cartesian_to_frenet(ring_track, (x, y))
            assert abs(d) <= 0.85

    def test_parked_opponent_forces_lane_change(self, graph, ring_track):
        state = self.start_state(ring_track)
        s0, _ = cartesian_to_frenet(ring_track, (state.x, state.y))
        opp = [OpponentTrack(s=s0 + 6.0, d=0.0, v=0.0)]
        traj = graph_plan(graph, state, opp, params=PARAMS)
        assert traj.flag == ""
        # the path must be >= 1 lane away when passing the opponent
        passing = []
        for x, y in traj.as_xy():
            s, d = cartesian_to_frenet(ring_track, (x, y))
            gap = (s - (s0 + 6.0)) % ring_track.total_length
            if min(gap, ring_track.total_length - gap) < 0.6:
                passing.append(abs(d))
        assert passing and min(passing) > 0.4

    def test_dp_matches_exhaustive_enumeration(self, graph, ring_track):
        """DP cost over 4 layers equals brute-force path enumeration."""
        state = self.start_state(ring_track)
        horizon = 4
        traj = graph_plan(graph, state, [], horizon_layers=horizon,
                          params=PARAMS)

        s0, d0 = cartesian_to_frenet(ring_track, (state.x, state.y))
        start_layer = int(np.searchsorted(graph.layer_s, s0 + 1e-9)) % graph.n_layers
        ds_entry = (graph.layer_s[start_layer] - s0) % ring_track.total_length
        if ds_entry < 0.8:
            start_layer = (start_layer + 1) % graph.n_layers
        from tenthsim.planning.lattice import _make_edge
        best = np.inf
        for lanes in itertools.product(range(3), repeat=horizon + 1):
            if abs(graph.offsets[lanes[0]] - d0) > 1.2 * graph.lane_spacing:
                continue
            entry_ds = (graph.layer_s[start_layer] - s0) % ring_track.total_length
            cost = _make_edge(ring_track, s0, entry_ds, d0,
                              float(graph.offsets[lanes[0]]), CFG).cost
            ok = True
            for li in range(horizon):
                edge = graph.edges.get(((start_layer + li) % graph.n_layers,
                                        lanes[li], lanes[li + 1]))
                if edge is None:
                    ok = False
                    break
                cost += edge.cost
            if ok:
                best = min(best, cost)
        assert traj.cost == pytest.approx(best, rel=1e-9)

    def test_everything_blocked_gives_fallback(self, graph, ring_track):
        state = self.start_state(ring_track)
        s0, _ = cartesian_to_frenet(ring_track, (state.x, state.y))
        opps = [OpponentTrack(s=s0 + k * 2.0, d=d, v=0.0)
                for k in range(1, 12) for d in (-0.845, 0.0, 0.845)]
        traj = graph_plan(graph, state, opps, params=PARAMS)
        assert traj.flag == "NOPATH"
        assert traj.vs[-1] == pytest.approx(0.0)
