"""Spin form of a QUBO under ``z = 2x - 1``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .formulation import QuboModel


@dataclass(frozen=True, eq=False)
class IsingModel:
    """``offset + sum h[i] z_i + sum J[i, j] z_i z_j`` over spins in {-1, +1}."""

    num_spins: int
    h: Mapping[int, float]
    J: Mapping[tuple[int, int], float]
    offset: float = 0.0
    _dense: tuple = field(init=False, repr=False, default=None)

    def __post_init__(self):
        for (i, j), v in self.J.items():
            if not 0 <= i < j < self.num_spins or v == 0:
                raise ValueError(f"bad coupling {(i, j)}: {v}")
        for i, v in self.h.items():
            if not 0 <= i < self.num_spins or v == 0:
                raise ValueError(f"bad field {i}: {v}")

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        if self._dense is None:
            h = np.zeros(self.num_spins)
            for i, v in self.h.items():
                h[i] = v
            J = np.zeros((self.num_spins, self.num_spins))
            for (i, j), v in self.J.items():
                J[i, j] = v
            object.__setattr__(self, "_dense", (h, J))
        return self._dense


def to_ising(model: QuboModel) -> IsingModel:
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = model.offset
    for i, q in model.linear.items():
        # q x = q/2 z + q/2
        h[i] = h.get(i, 0.0) + q / 2
        offset += q / 2
    for (i, j), q in model.quadratic.items():
        # q x_i x_j = q/4 (z_i z_j + z_i + z_j + 1)
        J[(i, j)] = q / 4
        h[i] = h.get(i, 0.0) + q / 4
        h[j] = h.get(j, 0.0) + q / 4
        offset += q / 4
    h = {i: v for i, v in sorted(h.items()) if v != 0}
    J = {k: v for k, v in sorted(J.items()) if v != 0}
    return IsingModel(model.num_vars, h, J, offset)


def spins_from_bits(bits: Sequence[int]) -> np.ndarray:
    return 2 * np.asarray(bits, dtype=np.int8) - 1


def bits_from_spins(spins: Sequence[int]) -> np.ndarray:
    return ((np.asarray(spins, dtype=np.int8) + 1) // 2).astype(np.uint8)


def ising_energy(model: IsingModel, spins: Sequence[int]) -> float:
    z = np.asarray(spins)
    if z.shape != (model.num_spins,):
        raise ValueError(f"expected {model.num_spins} spins, got shape {z.shape}")
    if not np.all((z == 1) | (z == -1)):
        raise ValueError("spins must be -1 or +1")
    total = model.offset
    for i, v in model.h.items():
        total += v * z[i]
    for (i, j), v in model.J.items():
        total += v * z[i] * z[j]
    return float(total)


def ising_energies(model: IsingModel, spins: np.ndarray) -> np.ndarray:
    """Vectorized energies for a ``[batch, num_spins]`` array of +-1."""
    z = np.asarray(spins, dtype=float)
    h, J = model.dense()
    return model.offset + z @ h + np.einsum("bi,bi->b", z @ J, z)


def basis_bits(num_qubits: int, indices: np.ndarray | None = None) -> np.ndarray:
    """Bits of basis states, little-endian: bit ``k`` of the index is variable ``k``."""
    if indices is None:
        indices = np.arange(1 << num_qubits, dtype=np.int64)
    return ((indices[:, None] >> np.arange(num_qubits)) & 1).astype(np.uint8)


def diagonal(model: IsingModel) -> np.ndarray:
    """Energy of every computational basis state, indexed little-endian."""
    return ising_energies(model, 2.0 * basis_bits(model.num_spins) - 1.0)
