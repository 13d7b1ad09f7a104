from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SolverError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Best assignment found plus a best-so-far energy trace."""

    best: np.ndarray
    energy: float
    trajectory: list[tuple[int, float]] = field(default_factory=list)
    solver: str = ""
    seed: int | None = None
    converged: bool = True

    def __eq__(self, other):
        if not isinstance(other, SolveReport):
            return NotImplemented
        return (
            np.array_equal(self.best, other.best)
            and self.energy == other.energy
            and self.trajectory == other.trajectory
            and (self.solver, self.seed, self.converged) == (other.solver, other.seed, other.converged)
        )

    __hash__ = None


def running_min(values) -> list[float]:
    out, best = [], np.inf
    for v in values:
        best = min(best, float(v))
        out.append(best)
    return out
