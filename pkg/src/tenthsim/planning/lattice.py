"""Lattice graph over the track: layered nodes at lane offsets, quintic edge
primitives, and dynamic-programming shortest paths with opponent masking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..collision import FootprintRect, check_map_collision
from ..errors import DomainError
from ..gridmap import OccupancyGridMap
from ..track import Track, cartesian_to_frenet, frenet_to_cartesian_arrays, \
    polyline_curvature
from ..vehicle import VehicleParams, VehicleState
from .frenet import QuinticPolynomial
from .profile import velocity_profile
from .trajectory import Trajectory

EDGE_SAMPLE_STEP = 0.25


@dataclass(frozen=True)
class LatticeConfig:
    layer_ds: float = 2.0
    n_lanes: int = 5
    vehicle_width: float = 0.31
    k_kappa: float = 5.0       # weight of integrated squared curvature
    horizon_layers: int = 10


@dataclass(frozen=True)
class LatticeEdge:
    points: np.ndarray = field(repr=False)   # (K, 2) world samples
    cost: float = 0.0


@dataclass(frozen=True)
class LatticeGraph:
    track: Track
    layer_s: np.ndarray            # arclength of each layer
    offsets: np.ndarray            # lane offsets, right to left
    node_xy: np.ndarray = field(repr=False)   # (L, n_lanes, 2)
    edges: dict = field(repr=False)            # (layer, i, j) -> LatticeEdge
    config: LatticeConfig = field(default_factory=LatticeConfig)

    @property
    def n_layers(self) -> int:
        return self.layer_s.size

    @property
    def n_lanes(self) -> int:
        return self.offsets.size

    @property
    def lane_spacing(self) -> float:
        if self.offsets.size > 1:
            return float(self.offsets[1] - self.offsets[0])
        return float(self.track.w_left.min() + self.track.w_right.min())


def build_lattice_graph(track: Track, params: VehicleParams,
                        cfg: LatticeConfig = LatticeConfig(),
                        grid: OccupancyGridMap | None = None) -> LatticeGraph:
    """Layers every layer_ds meters, nodes at the lane offsets, edges between
    consecutive layers for |lane change| <= 1 realized as quintic lateral
    primitives in arclength; edges colliding with the map are pruned here
    when a grid is supplied.
    """
    if not track.closed:
        raise DomainError("lattice graph requires a closed track")
    margin = cfg.vehicle_width / 2.0
    usable_left = float(track.w_left.min()) - margin
    usable_right = float(track.w_right.min()) - margin
    if usable_left < 0.0 or usable_right < 0.0:
        raise DomainError("track too narrow for the lattice")
    if cfg.n_lanes == 1:
        offsets = np.array([0.0])
    else:
        offsets = np.linspace(-usable_right, usable_left, cfg.n_lanes)

    n_layers = max(int(track.total_length // cfg.layer_ds), 2)
    layer_s = np.arange(n_layers) * (track.total_length / n_layers)

    node_xy = np.empty((n_layers, offsets.size, 2))
    for k, s in enumerate(layer_s):
        x, y, _ = frenet_to_cartesian_arrays(
            track, np.full(offsets.size, s), offsets)
        node_xy[k, :, 0] = x
        node_xy[k, :, 1] = y

    edges = {}
    for k in range(n_layers):
        s0 = layer_s[k]
        s1 = layer_s[(k + 1) % n_layers]
        ds = (s1 - s0) % track.total_length
        if ds == 0.0:
            ds = track.total_length / n_layers
        for i in range(offsets.size):
            for j in range(offsets.size):
                if abs(i - j) > 1:
                    continue
                edge = _make_edge(track, s0, ds, offsets[i], offsets[j], cfg)
                if _edge_hits_map(edge, grid, params):
                    continue
                edges[(k, i, j)] = edge
    return LatticeGraph(track=track, layer_s=layer_s, offsets=offsets,
                        node_xy=node_xy, edges=edges, config=cfg)


def prune_edges_against_map(graph: LatticeGraph, grid: OccupancyGridMap,
                            params: VehicleParams) -> LatticeGraph:
    """Drop edges whose swept footprint clips the static map."""
    kept = {key: e for key, e in graph.edges.items()
            if not _edge_hits_map(e, grid, params)}
    return LatticeGraph(track=graph.track, layer_s=graph.layer_s,
                        offsets=graph.offsets, node_xy=graph.node_xy,
                        edges=kept, config=graph.config)


def _make_edge(track: Track, s0: float, ds: float, d_from: float, d_to: float,
               cfg: LatticeConfig) -> LatticeEdge:
    n = max(int(math.ceil(ds / EDGE_SAMPLE_STEP)), 3)
    sigma = np.linspace(0.0, ds, n + 1)
    if d_from == d_to:
        d = np.full(sigma.size, d_from)
    else:
        poly = QuinticPolynomial(d_from, 0.0, 0.0, d_to, 0.0, 0.0, ds)
        d = poly.value(sigma)
    x, y, _ = frenet_to_cartesian_arrays(track, s0 + sigma, d)
    pts = np.column_stack([x, y])
    seg = np.hypot(np.diff(x), np.diff(y))
    length = float(seg.sum())
    kappa = polyline_curvature(x, y, closed=False)
    step = length / max(seg.size, 1)
    cost = length + cfg.k_kappa * float((kappa ** 2).sum() * step)
    return LatticeEdge(points=pts, cost=cost)


def _edge_hits_map(edge: LatticeEdge, grid: OccupancyGridMap | None,
                   params: VehicleParams) -> bool:
    if grid is None:
        return False
    pts = edge.points
    headings = np.arctan2(np.gradient(pts[:, 1]), np.gradient(pts[:, 0]))
    for (x, y), th in zip(pts, headings):
        if check_map_collision(grid, FootprintRect(x, y, th, params.length,
                                                   params.width)):
            return True
    return False


@dataclass(frozen=True)
class OpponentTrack:
    """Opponent snapshot projected along the track at constant speed."""

    s: float
    d: float
    v: float


def graph_plan(graph: LatticeGraph, state: VehicleState, opponents,
               horizon_layers: int | None = None,
               params: VehicleParams | None = None) -> Trajectory:
    """DP shortest path over the next horizon layers, opponents masked.

    `opponents` may contain OpponentTrack entries or (pose-like) objects with
    x/y/v attributes, which are projected into Frenet. Returns the
    concatenated edge primitives with a velocity profile; a NOPATH flag and
    braking profile when every route is masked.
    """
    params = params or VehicleParams()
    cfg = graph.config
    horizon = horizon_layers or cfg.horizon_layers
    track = graph.track

    s0, d0 = cartesian_to_frenet(track, (state.x, state.y))
    lane0 = int(np.argmin(np.abs(graph.offsets - d0)))
    if abs(graph.offsets[lane0] - d0) > graph.lane_spacing:
        return _braking_fallback(state, params, flag="NOPATH")
    # first layer far enough ahead for the entry primitive to be drivable
    start_layer = int(np.searchsorted(graph.layer_s, s0 + 1e-9)) % graph.n_layers
    ds_entry = (graph.layer_s[start_layer] - s0) % track.total_length
    if ds_entry < 0.8:
        start_layer = (start_layer + 1) % graph.n_layers
        ds_entry = (graph.layer_s[start_layer] - s0) % track.total_length

    opp = [_as_opponent(track, o) for o in opponents]
    v_ref = max(state.v, 0.5)

    # blocked[l][i]: opponent occupies node i of the l-th horizon layer
    blocked = np.zeros((horizon + 1, graph.n_lanes), dtype=bool)
    block_s = params.length + 0.5
    block_d = cfg.vehicle_width / 2.0 + params.width / 2.0 + 0.1
    for li in range(horizon + 1):
        layer = (start_layer + li) % graph.n_layers
        s_l = graph.layer_s[layer]
        dist_ahead = (s_l - s0) % track.total_length
        t_l = dist_ahead / v_ref
        for o in opp:
            s_opp = (o.s + o.v * t_l) % track.total_length
            gap = (s_l - s_opp) % track.total_length
            gap = min(gap, track.total_length - gap)
            if gap < block_s:
                for i in range(graph.n_lanes):
                    if abs(graph.offsets[i] - o.d) < block_d:
                        blocked[li, i] = True

    # entry primitives from the exact ego position to the first layer
    entry: dict[int, LatticeEdge] = {}
    max_entry_jump = 1.2 * graph.lane_spacing
    for i in range(graph.n_lanes):
        if blocked[0, i] or abs(graph.offsets[i] - d0) > max_entry_jump:
            continue
        entry[i] = _make_edge(track, s0, ds_entry, d0, float(graph.offsets[i]),
                              cfg)

    big = np.inf
    cost = np.full((horizon + 1, graph.n_lanes), big)
    parent = np.full((horizon + 1, graph.n_lanes), -1, dtype=np.int64)
    for i, edge in entry.items():
        cost[0, i] = edge.cost
    for li in range(horizon):
        layer = (start_layer + li) % graph.n_layers
        for i in range(graph.n_lanes):
            if not np.isfinite(cost[li, i]):
                continue
            for j in range(graph.n_lanes):
                edge = graph.edges.get((layer, i, j))
                if edge is None or blocked[li + 1, j]:
                    continue
                c = cost[li, i] + edge.cost
                if c < cost[li + 1, j]:
                    cost[li + 1, j] = c
                    parent[li + 1, j] = i

    if not np.isfinite(cost[horizon]).any():
        return _braking_fallback(state, params, flag="NOPATH")

    lane = int(np.argmin(cost[horizon]))
    lanes_seq = [lane]
    for li in range(horizon, 0, -1):
        lane = int(parent[li, lane])
        lanes_seq.append(lane)
    lanes_seq.reverse()

    pts = [entry[lanes_seq[0]].points]
    for li in range(horizon):
        layer = (start_layer + li) % graph.n_layers
        edge = graph.edges[(layer, lanes_seq[li], lanes_seq[li + 1])]
        pts.append(edge.points[1:])
    points = np.vstack(pts)
    v = velocity_profile(points[:, 0], points[:, 1], params, closed=False,
                         v_start=max(state.v, 1.0))
    return Trajectory.from_points(points, v, source="graph",
                                  cost=float(cost[horizon].min()))


def _as_opponent(track: Track, o) -> OpponentTrack:
    if isinstance(o, OpponentTrack):
        return o
    s, d = cartesian_to_frenet(track, (o.x, o.y))
    return OpponentTrack(s=s, d=d, v=getattr(o, "v", 0.0))


def _braking_fallback(state: VehicleState, params: VehicleParams,
                      flag: str) -> Trajectory:
    """Straight-ahead stop segment used when the graph offers no route."""
    length = max(state.v ** 2 / (2.0 * params.a_max), 1.0)
    s = np.linspace(0.0, length, 12)
    xs = state.x + s * math.cos(state.theta)
    ys = state.y + s * math.sin(state.theta)
    vs = np.sqrt(np.maximum(state.v ** 2 - 2.0 * params.a_max * s, 0.0))
    return Trajectory(xs=xs, ys=ys, thetas=np.full(s.size, state.theta),
                      vs=vs, ss=s, source="graph", flag=flag)
