"""Steiner tree problems compiled to time-expanded QUBO models.

The pipeline is: parse an instance (:mod:`graph_io`), build the penalty
model (:mod:`qubo`), sample it (:mod:`annealer`), decode samples into trees
(:mod:`decoder`) and compare against exact optima (:mod:`oracle`).
"""

from steiner_qubo.graph_io import Graph, WeightMatrix, build_weight_matrix, parse_stp, serialize_stp
from steiner_qubo.oracle import brute_force, dreyfus_wagner
from steiner_qubo.qubo import IsingModel, QuboModel, VarIndex, assemble, energy

__all__ = [
    "Graph",
    "IsingModel",
    "QuboModel",
    "VarIndex",
    "WeightMatrix",
    "assemble",
    "brute_force",
    "build_weight_matrix",
    "dreyfus_wagner",
    "energy",
    "parse_stp",
    "serialize_stp",
]

__version__ = "0.1.0"
