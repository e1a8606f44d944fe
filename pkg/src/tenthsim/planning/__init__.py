"""Planners: reactive gap following, lanes, Frenet sampling, lattice graph,
raceline optimization, and velocity profiling."""

from .frenet import (FrenetConfig, QuarticPolynomial, QuinticPolynomial,
                     frenet_candidates, frenet_select)
from .lanes import LaneChoice, LaneSet, build_lanes, lane_switch
from .lattice import (LatticeConfig, LatticeGraph, OpponentTrack,
                      build_lattice_graph, graph_plan, prune_edges_against_map)
from .profile import velocity_profile
from .raceline import min_curvature_raceline
from .reactive import (GapCommand, GapFollowerConfig, aeb_should_brake,
                       follow_the_gap)
from .trajectory import Trajectory, resample_polyline

__all__ = [
    "FrenetConfig", "QuarticPolynomial", "QuinticPolynomial",
    "frenet_candidates", "frenet_select",
    "LaneChoice", "LaneSet", "build_lanes", "lane_switch",
    "LatticeConfig", "LatticeGraph", "OpponentTrack", "build_lattice_graph",
    "graph_plan", "prune_edges_against_map",
    "velocity_profile", "min_curvature_raceline",
    "GapCommand", "GapFollowerConfig", "aeb_should_brake", "follow_the_gap",
    "Trajectory", "resample_polyline",
]
