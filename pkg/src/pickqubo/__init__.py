"""QUBO/Ising toolkit for warehouse robot order picking and batching."""

from .decode import FeasibilityReport, Solution, Violation, decode, route_distance, validate
from .formulation import (
    EncodingLayout,
    PenaltyWeights,
    QuboModel,
    assemble_qubo,
    build_constraints,
    build_objective,
    make_layout,
    qubit_count,
    qubo_energy,
)
from .instance import Instance, Node, build_distance_matrix, load_instance, make_instance, read_instance, resolve_instance
from .ising import IsingModel, ising_energy, spins_from_bits, to_ising
from .oracle import OracleResult, oracle_optimum
from .solvers import AnnealConfig, VqeConfig, solve_anneal, solve_exact, solve_vqe

__version__ = "0.1.0"
