"""Decoding graphs, edge-weight formulas, and exact MWPM decoding."""

from .formulas import gamma
from .graph import DecodingGraph, build_graphs, build_rep_graph, build_surface_graphs
from .mwpm import (
    Matching,
    brute_force_matching,
    decide_failure,
    decode,
    ideal_logical_class,
    mwpm,
)

__all__ = [
    "gamma",
    "DecodingGraph",
    "build_graphs",
    "build_rep_graph",
    "build_surface_graphs",
    "Matching",
    "mwpm",
    "brute_force_matching",
    "decode",
    "decide_failure",
    "ideal_logical_class",
]
