"""Random greedy generation of high-girth regular graphs, with checks."""

from .graph import AtLeast, Graph, GraphError, cycle_graph, girth, hamilton_cycle, truncated_distance
from .process import (FROZEN, ConfigError, ProcessConfig, ProcessState, RunRecord, StepResult,
                      available_pairs, batch_run, count_available, is_available, run,
                      sample_available_pair, step)
from .rng import Xoshiro256

__version__ = "0.1.0"

__all__ = [
    "AtLeast", "ConfigError", "FROZEN", "Graph", "GraphError", "ProcessConfig", "ProcessState",
    "RunRecord", "StepResult", "Xoshiro256", "available_pairs", "batch_run", "count_available",
    "cycle_graph", "girth", "hamilton_cycle", "is_available", "run", "sample_available_pair",
    "step", "truncated_distance",
]
