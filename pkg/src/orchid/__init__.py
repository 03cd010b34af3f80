"""Ollivier-Ricci curvature of hypergraphs.

Three walk measures crossed with three transport aggregators, synthetic
hypergraph models, and statistics over curvature distributions.
"""

__version__ = "0.1.0"

from .curvature import (
    Aggregator,
    CurvatureConfig,
    CurvatureEngine,
    CurvatureResult,
    all_curvatures,
    curvature_bounds,
    directional_curvature,
    edge_curvature,
    node_curvature_edges,
    node_curvature_neighborhood,
    subset_curvature,
)
from .errors import OrchidError
from .hypergraph import Graph, Hypergraph, StructuralProfile, parse_hypergraph, read_hypergraph, write_hypergraph
from .measures import MeasureKind, SparseMeasure, build_measure
from .transport import BACKEND, jump, reduce_instance, w1_empirical_1d, wasserstein1, wasserstein_barycenter

__all__ = [
    "Aggregator",
    "BACKEND",
    "CurvatureConfig",
    "CurvatureEngine",
    "CurvatureResult",
    "Graph",
    "Hypergraph",
    "MeasureKind",
    "OrchidError",
    "SparseMeasure",
    "StructuralProfile",
    "all_curvatures",
    "build_measure",
    "curvature_bounds",
    "directional_curvature",
    "edge_curvature",
    "jump",
    "node_curvature_edges",
    "node_curvature_neighborhood",
    "parse_hypergraph",
    "read_hypergraph",
    "reduce_instance",
    "subset_curvature",
    "w1_empirical_1d",
    "wasserstein1",
    "wasserstein_barycenter",
    "write_hypergraph",
]
