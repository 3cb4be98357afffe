"""Discrete load balancing on graphs under matching schedules."""
from .graph import Graph, build_named, edge_color, load_graph, save_graph
from .process import run, run_standard_batch, step_continuous, step_standard
from .schedule import (
    AsyncEdgeModel,
    CircuitModel,
    Matching,
    RandomMatchingModel,
    ReplayModel,
    make_model,
)
from .tokens import TokenState, step_height

__version__ = "0.1.0"

__all__ = [
    "Graph", "build_named", "edge_color", "load_graph", "save_graph",
    "run", "run_standard_batch", "step_continuous", "step_standard",
    "AsyncEdgeModel", "CircuitModel", "Matching", "RandomMatchingModel", "ReplayModel", "make_model",
    "TokenState", "step_height",
]
