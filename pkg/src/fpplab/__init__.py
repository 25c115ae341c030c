"""Exact first-passage percolation on T_d x Z and its subgraphs."""

from .geodesic import BudgetExceeded, GeodesicResult, shortest_path
from .topology import EdgeKey, EdgeKind, Topology, Vertex
from .weights import WeightOracle, WeightSpec

__all__ = [
    "BudgetExceeded", "EdgeKey", "EdgeKind", "GeodesicResult", "Topology", "Vertex",
    "WeightOracle", "WeightSpec", "shortest_path",
]
__version__ = "0.1.0"
