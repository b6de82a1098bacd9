"""Diffusion-based recommenders (ProbS, HeatS, Hybrid, PD, BHC, PLIERS) on bipartite user-tag graphs."""

from .graph import BipartiteGraph, GraphStats, build_graph, remove_edges, stats
from .scorers import ALGORITHMS, RankedList, ScorerParams, recommend, score

__all__ = [
    "ALGORITHMS",
    "BipartiteGraph",
    "GraphStats",
    "RankedList",
    "ScorerParams",
    "build_graph",
    "recommend",
    "remove_edges",
    "score",
    "stats",
]

__version__ = "0.1.0"
