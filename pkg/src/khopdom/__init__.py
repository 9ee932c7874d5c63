"""Simulation and verification toolkit for k-hop dominating sets in the
anonymous port-numbering model."""

from .algorithms import (
    ALGORITHMS,
    alg1_prune,
    alg2_prune_with_fallback,
    alg3_distance_aware,
    alg4_select,
    pipeline_3k,
    round_budget,
)
from .generators import (
    Instance,
    gen_alternating_cycle,
    gen_kroundlower_pair,
    gen_planted_regular,
    gen_pseudoforest_H,
    gen_random_connected,
    gen_symmetric_regular,
)
from .graph_core import PortGraph, bfs_distances, girth
from .simulator import NodeProgram, RunResult, assert_symmetric_run, run, view, view_classes

__version__ = "0.1.0"
