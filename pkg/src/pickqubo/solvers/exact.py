"""Exhaustive minimization over all 2**n assignments."""

from __future__ import annotations

import numba
import numpy as np

from ..formulation import QuboModel
from .report import SolveReport, SolverError

MAX_VARS = 24
# bits walked in Gray-code order below each exactly-evaluated prefix
_LOW_BITS = 16


@numba.njit(cache=True)
def _search(lin, Qs, Qu, offset, low_bits):
    n = lin.shape[0]
    n_prefix = 1 << (n - low_bits)
    x = np.zeros(n, dtype=np.uint8)
    field = np.empty(n)
    best_e = np.inf
    best_idx = 0
    trace = np.empty(n_prefix)
    for h in range(n_prefix):
        # exact energy and local fields at the start of each block
        for k in range(n):
            x[k] = 0
        for k in range(n - low_bits):
            x[low_bits + k] = (h >> k) & 1
        e = offset
        for i in range(n):
            if x[i]:
                e += lin[i]
                for j in range(i + 1, n):
                    if x[j]:
                        e += Qu[i, j]
        for i in range(n):
            f = lin[i]
            for j in range(n):
                if x[j]:
                    f += Qs[i, j]
            field[i] = f
        cur = h << low_bits
        for step in range(1 << low_bits):
            if step > 0:
                b = 0
                while not (step >> b) & 1:
                    b += 1
                if x[b]:
                    e -= field[b]
                    sign = -1.0
                else:
                    e += field[b]
                    sign = 1.0
                x[b] ^= 1
                cur ^= 1 << b
                for j in range(n):
                    field[j] += sign * Qs[b, j]
            tol = 1e-9 * max(1.0, abs(e))
            if e < best_e - tol:
                best_e = e
                best_idx = cur
            elif e <= best_e + tol and cur < best_idx:
                best_idx = cur
                if e < best_e:
                    best_e = e
        trace[h] = best_e
    return best_idx, trace


def solve_exact(model: QuboModel, max_vars: int = MAX_VARS) -> SolveReport:
    """Global minimizer; ties go to the smallest little-endian integer value.

    Energies within ``1e-9`` relative of each other count as ties, so
    summation-order rounding cannot flip the winner.
    """
    n = model.num_vars
    if n > max_vars:
        raise SolverError(f"exact search is capped at {max_vars} variables, model has {n}")
    if n == 0:
        return SolveReport(np.zeros(0, dtype=np.uint8), float(model.offset), [(0, float(model.offset))], "exact")
    lin, Qu = model.dense()
    Qs = Qu + Qu.T
    best_idx, trace = _search(lin, Qs, Qu, float(model.offset), min(n, _LOW_BITS))
    best = ((int(best_idx) >> np.arange(n)) & 1).astype(np.uint8)
    xf = best.astype(float)
    energy = float(model.offset + xf @ lin + xf @ Qu @ xf)
    return SolveReport(best, energy, [(k, float(v)) for k, v in enumerate(trace)], "exact", None)
