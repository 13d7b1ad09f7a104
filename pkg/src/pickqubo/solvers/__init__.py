from .anneal import AnnealConfig, solve_anneal
from .exact import solve_exact
from .report import SolveReport, SolverError
from .vqe import Statevector, VqeConfig, build_ansatz_state, expectation, solve_vqe

__all__ = [
    "AnnealConfig",
    "SolveReport",
    "SolverError",
    "Statevector",
    "VqeConfig",
    "build_ansatz_state",
    "expectation",
    "solve_anneal",
    "solve_exact",
    "solve_vqe",
]
