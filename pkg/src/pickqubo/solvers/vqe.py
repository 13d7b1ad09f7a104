"""Exact statevector VQE for small Ising models.

The ansatz starts from the uniform superposition and stacks layers of
per-qubit Y rotations followed by a controlled-Z chain on neighbours
``(q, q+1)``. Basis index bit ``k`` is qubit ``k`` (little-endian).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..ising import IsingModel, basis_bits, diagonal
from .report import SolveReport, SolverError

QUBIT_CEILING = 24


@dataclass(frozen=True)
class VqeConfig:
    layers: int = 2
    max_iterations: int = 500
    tolerance: float = 1e-6
    seed: int = 0
    max_qubits: int = 16
    # basis states inspected when reading out the answer
    readout_states: int = 8

    def __post_init__(self):
        if self.layers < 1 or self.max_iterations < 1 or self.readout_states < 1:
            raise SolverError("layers, max_iterations and readout_states must be positive")
        if not self.tolerance > 0:
            raise SolverError("tolerance must be positive")
        if not 1 <= self.max_qubits <= QUBIT_CEILING:
            raise SolverError(f"max_qubits must lie in 1..{QUBIT_CEILING}")


@dataclass(frozen=True, eq=False)
class Statevector:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        size = a.shape[0] if a.ndim == 1 else 0
        if size < 1 or size & (size - 1):
            raise SolverError("amplitude count must be a power of two")
        norm = float(np.vdot(a, a).real)
        if abs(norm - 1) > 1e-9:
            raise SolverError(f"state is not normalized (|a|^2 = {norm})")
        object.__setattr__(self, "amplitudes", a)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _ry(state: np.ndarray, q: int, num_qubits: int, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    # C-order reshape: axis 0 is the most significant bit
    psi = state.reshape((2,) * num_qubits)
    axis = num_qubits - 1 - q
    a0 = np.take(psi, 0, axis=axis)
    a1 = np.take(psi, 1, axis=axis)
    return np.stack([c * a0 - s * a1, s * a0 + c * a1], axis=axis).reshape(-1)


def cz_chain_signs(num_qubits: int) -> np.ndarray:
    """Diagonal of CZ(0,1) CZ(1,2) ... CZ(q-2,q-1)."""
    bits = basis_bits(num_qubits).astype(np.int64)
    parity = (bits[:, :-1] * bits[:, 1:]).sum(axis=1) if num_qubits > 1 else np.zeros(1 << num_qubits, dtype=np.int64)
    return np.where(parity % 2, -1.0, 1.0)


def build_ansatz_state(num_qubits: int, params, layers: int, max_qubits: int = QUBIT_CEILING) -> Statevector:
    params = np.asarray(params, dtype=float)
    if num_qubits < 1 or num_qubits > min(max_qubits, QUBIT_CEILING):
        raise SolverError(f"{num_qubits} qubits exceeds the cap of {min(max_qubits, QUBIT_CEILING)}")
    if params.shape != (layers * num_qubits,):
        raise SolverError(f"expected {layers * num_qubits} parameters, got {params.shape}")
    dim = 1 << num_qubits
    state = np.full(dim, 1 / np.sqrt(dim), dtype=complex)
    signs = cz_chain_signs(num_qubits)
    for layer in range(layers):
        for q in range(num_qubits):
            state = _ry(state, q, num_qubits, params[layer * num_qubits + q])
        state = state * signs
    state /= np.linalg.norm(state)
    return Statevector(state)


def expectation(model: IsingModel, state: Statevector, energies: np.ndarray | None = None) -> float:
    """<psi|H|psi> for the diagonal Hamiltonian: sum of |a_z|^2 E(z)."""
    probs = state.probabilities()
    if probs.shape[0] != 1 << model.num_spins:
        raise SolverError(f"state has {probs.shape[0]} amplitudes, model needs 2**{model.num_spins}")
    if energies is None:
        energies = diagonal(model)
    return float(probs @ energies)


def solve_vqe(model: IsingModel, config: VqeConfig | None = None) -> SolveReport:
    """Nelder-Mead over ansatz parameters; reads out the best of the likeliest basis states.

    ``best`` holds 0/1 bits (``x = (z + 1) / 2``).
    """
    config = config or VqeConfig()
    q = model.num_spins
    if q > config.max_qubits:
        raise SolverError(f"{q} qubits exceeds max_qubits={config.max_qubits}; use annealing instead")
    energies = diagonal(model)
    rng = np.random.default_rng(config.seed)
    x0 = rng.uniform(0, 2 * np.pi, size=config.layers * q)

    def cost(theta):
        return expectation(model, build_ansatz_state(q, theta, config.layers, config.max_qubits), energies)

    trajectory = []
    best_seen = [cost(x0)]

    def record(xk):
        best_seen[0] = min(best_seen[0], cost(xk))
        trajectory.append((len(trajectory) + 1, best_seen[0]))

    trajectory.append((0, best_seen[0]))
    res = minimize(
        cost,
        x0,
        method="Nelder-Mead",
        callback=record,
        options={"maxiter": config.max_iterations, "xatol": config.tolerance, "fatol": config.tolerance},
    )
    probs = build_ansatz_state(q, res.x, config.layers, config.max_qubits).probabilities()
    top = np.argsort(-probs, kind="stable")[: config.readout_states]
    pick = int(min(top, key=lambda z: (energies[z], z)))
    bits = basis_bits(q, np.array([pick]))[0]
    return SolveReport(bits, float(energies[pick]), trajectory, "vqe", config.seed, bool(res.success))
