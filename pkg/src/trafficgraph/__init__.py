"""Graph-embedding features for traffic congestion prediction on sensor networks."""

from .errors import TrafficGraphError
from .graph import Graph, GraphStats, build_graph, graph_stats, laplacian

__version__ = "0.1.0"

__all__ = ["Graph", "GraphStats", "TrafficGraphError", "__version__", "build_graph", "graph_stats", "laplacian"]
