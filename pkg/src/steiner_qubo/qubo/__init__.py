from steiner_qubo.qubo.builders import (
    DEFAULT_LAMBDA,
    assemble,
    build_h1,
    build_h2,
    build_h3,
    build_h4,
    build_h5,
    build_h6,
    build_model,
    build_objective,
    penalty_floor,
)
from steiner_qubo.qubo.index import VarIndex, default_slack_bits
from steiner_qubo.qubo.model import (
    LABELS,
    PENALTY_LABELS,
    IsingModel,
    QuboBuilder,
    QuboModel,
    Terms,
    energies,
    energy,
    exhaustive_minimum,
    ising_energy,
    read_model,
    to_ising,
    to_qubo,
    write_model,
)

__all__ = [
    "DEFAULT_LAMBDA", "LABELS", "PENALTY_LABELS", "IsingModel", "QuboBuilder", "QuboModel", "Terms",
    "VarIndex", "assemble", "build_h1", "build_h2", "build_h3", "build_h4", "build_h5", "build_h6",
    "build_model", "build_objective", "default_slack_bits", "energies", "energy", "exhaustive_minimum",
    "ising_energy", "penalty_floor", "read_model", "to_ising", "to_qubo", "write_model",
]
