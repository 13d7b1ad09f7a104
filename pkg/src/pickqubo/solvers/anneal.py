"""Metropolis simulated annealing on a QUBO under a geometric temperature schedule.

Every sweep tries a flip of each bit in turn. When the model carries an
``EncodingLayout`` (``moves="mixed"``, the default) each sweep also proposes
compound moves on whole route rows: swapping two steps of one robot,
reversing a stretch of steps, exchanging steps between two robots, and
rewriting one step to a single node. Moves that change a robot's load also
reset its slack register to the balancing value when it is representable. Compound moves are accepted with the same
Metropolis rule on the exact QUBO energy difference. They exist because a
single flip that moves a product changes a robot's load by its weight, and
the capacity penalty makes that a barrier of ``lambda * w**2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..formulation import EncodingLayout, QuboModel
from .report import SolveReport, SolverError

MOVES = ("mixed", "flip")


@dataclass(frozen=True)
class AnnealConfig:
    sweeps: int = 2000
    restarts: int = 16
    t_initial: float | None = None
    t_final: float | None = None
    seed: int = 0
    moves: str = "mixed"

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise SolverError("sweeps and restarts must be positive")
        for name in ("t_initial", "t_final"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise SolverError(f"{name} must be positive")
        if self.t_initial is not None and self.t_final is not None and self.t_initial < self.t_final:
            raise SolverError("t_initial must be >= t_final")
        if not 0 <= self.seed < 2**64:
            raise SolverError("seed must fit in 64 unsigned bits")
        if self.moves not in MOVES:
            raise SolverError(f"moves must be one of {MOVES}")


def default_temperatures(model: QuboModel) -> tuple[float, float]:
    """(max |coefficient|, 1e-3 * min nonzero |coefficient|)."""
    mags = np.abs(np.fromiter(model.coefficients(), dtype=float))
    mags = mags[mags > 0]
    if mags.size == 0:
        return 1.0, 1e-3
    return float(mags.max()), 1e-3 * float(mags.min())


def _neighbors(model: QuboModel):
    """CSR adjacency of the symmetric coupling graph."""
    n = model.num_vars
    rows = [[] for _ in range(n)]
    for (i, j), v in model.quadratic.items():
        rows[i].append((j, v))
        rows[j].append((i, v))
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i, r in enumerate(rows):
        indptr[i + 1] = indptr[i] + len(r)
    indices = np.empty(indptr[-1], dtype=np.int64)
    data = np.empty(indptr[-1], dtype=np.float64)
    for i, r in enumerate(rows):
        for k, (j, v) in enumerate(sorted(r)):
            indices[indptr[i] + k] = j
            data[indptr[i] + k] = v
    return indptr, indices, data


def _layout_tables(layout: EncodingLayout | None):
    if layout is None:
        return (np.zeros((0, 0, 0), np.int64), 0, 0, np.zeros((0, 0), np.int64), np.zeros(0), 0)
    steps = layout.time_steps
    route = np.empty((layout.K, len(steps), layout.n + 1), dtype=np.int64)
    for p in range(layout.K):
        for k, t in enumerate(steps):
            for i in range(layout.n + 1):
                route[p, k, i] = layout.route_index(t, i, p + 1)
    m = layout.slack_bits_per_robot
    slack = np.empty((layout.K, m), dtype=np.int64)
    for p in range(layout.K):
        for b in range(m):
            slack[p, b] = layout.slack_index(p + 1, b)
    # boundary steps of the full layout stay put
    lo, hi = (1, len(steps) - 2) if layout.mode == "full" else (0, len(steps) - 1)
    return route, lo, hi, slack, np.array(layout.slack_coefficients, dtype=np.float64), layout.M


@numba.njit(cache=True)
def _apply(x, field, flips, nflip, indptr, indices, data):
    for a in range(nflip):
        i = flips[a]
        sign = 1.0 if x[i] == 0 else -1.0
        x[i] ^= 1
        for k in range(indptr[i], indptr[i + 1]):
            field[indices[k]] += sign * data[k]


@numba.njit(cache=True)
def _delta(x, field, Qs, flips, nflip):
    d = 0.0
    for a in range(nflip):
        i = flips[a]
        si = 1.0 if x[i] == 0 else -1.0
        d += si * field[i]
        for b in range(a + 1, nflip):
            j = flips[b]
            sj = 1.0 if x[j] == 0 else -1.0
            d += si * sj * Qs[i, j]
    return d


@numba.njit(cache=True)
def _swap_rows(x, route, p1, k1, p2, k2, flips, nflip):
    for i in range(route.shape[2]):
        a = route[p1, k1, i]
        b = route[p2, k2, i]
        if x[a] != x[b]:
            flips[nflip] = a
            flips[nflip + 1] = b
            nflip += 2
    return nflip


@numba.njit(cache=True)
def _row_weight(x, route, p, k, w):
    s = 0.0
    for i in range(1, route.shape[2]):
        if x[route[p, k, i]]:
            s += w[i]
    return s


@numba.njit(cache=True)
def _robot_load(x, route, p, w):
    s = 0.0
    for k in range(route.shape[1]):
        s += _row_weight(x, route, p, k, w)
    return s


@numba.njit(cache=True)
def _rebalance_slack(x, slack, coeffs, p, load, M, flips, nflip):
    """Queue slack flips so robot ``p`` satisfies load + slack == M, when representable."""
    m = coeffs.shape[0]
    if m == 0:
        return nflip
    target = M - load
    if target < 0 or target != np.floor(target):
        return nflip
    t = int(target)
    low_max = (1 << (m - 1)) - 1
    top = int(coeffs[m - 1])
    if t <= low_max:
        use_top = 0
        rest = t
    elif 0 <= t - top <= low_max:
        use_top = 1
        rest = t - top
    else:
        return nflip
    for b in range(m):
        want = use_top if b == m - 1 else (rest >> b) & 1
        j = slack[p, b]
        if x[j] != want:
            flips[nflip] = j
            nflip += 1
    return nflip


@numba.njit(cache=True)
def _anneal_run(lin, Qs, indptr, indices, data, offset, temps, seed, route, lo, hi, slack, coeffs, w, M, n_moves):
    np.random.seed(seed)
    n = lin.shape[0]
    x = np.zeros(n, dtype=np.uint8)
    for i in range(n):
        x[i] = 1 if np.random.random() < 0.5 else 0
    # field[i] = energy change of turning bit i on, given the other bits
    field = lin.copy()
    energy = offset
    for i in range(n):
        if x[i]:
            energy += lin[i]
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                field[j] += data[k]
                if x[j] and j < i:
                    energy += data[k]
    K = route.shape[0]
    flips = np.empty(n, dtype=np.int64)
    best_x = x.copy()
    best_e = energy
    for s in range(temps.shape[0]):
        beta = 1.0 / temps[s]
        for i in range(n):
            delta = field[i] if x[i] == 0 else -field[i]
            if delta <= 0.0 or np.random.random() < np.exp(-delta * beta):
                flips[0] = i
                _apply(x, field, flips, 1, indptr, indices, data)
                energy += delta
        if K > 0:
            for _ in range(n_moves):
                kind = np.random.randint(0, 4)
                nflip = 0
                if kind == 3:
                    # rewrite one row to a single node, slack follows the load
                    p = np.random.randint(0, K)
                    k = np.random.randint(lo, hi + 1)
                    j = np.random.randint(0, route.shape[2])
                    moved = (w[j] if j > 0 else 0.0) - _row_weight(x, route, p, k, w)
                    for i in range(route.shape[2]):
                        want = 1 if i == j else 0
                        a = route[p, k, i]
                        if x[a] != want:
                            flips[nflip] = a
                            nflip += 1
                    if nflip and moved != 0.0:
                        nflip = _rebalance_slack(x, slack, coeffs, p, _robot_load(x, route, p, w) + moved, M, flips, nflip)
                elif kind == 2:
                    if K < 2:
                        continue
                    p1 = np.random.randint(0, K)
                    p2 = np.random.randint(0, K - 1)
                    if p2 >= p1:
                        p2 += 1
                    k1 = np.random.randint(lo, hi + 1)
                    k2 = np.random.randint(lo, hi + 1)
                    moved = _row_weight(x, route, p2, k2, w) - _row_weight(x, route, p1, k1, w)
                    nflip = _swap_rows(x, route, p1, k1, p2, k2, flips, 0)
                    if nflip and moved != 0.0:
                        nflip = _rebalance_slack(x, slack, coeffs, p1, _robot_load(x, route, p1, w) + moved, M, flips, nflip)
                        nflip = _rebalance_slack(x, slack, coeffs, p2, _robot_load(x, route, p2, w) - moved, M, flips, nflip)
                else:
                    if hi <= lo:
                        continue
                    p = np.random.randint(0, K)
                    k1 = np.random.randint(lo, hi + 1)
                    k2 = np.random.randint(lo, hi)
                    if k2 >= k1:
                        k2 += 1
                    if k1 > k2:
                        k1, k2 = k2, k1
                    if kind == 0:
                        nflip = _swap_rows(x, route, p, k1, p, k2, flips, 0)
                    else:
                        for d in range((k2 - k1 + 1) // 2):
                            nflip = _swap_rows(x, route, p, k1 + d, p, k2 - d, flips, nflip)
                if nflip == 0:
                    continue
                delta = _delta(x, field, Qs, flips, nflip)
                if delta <= 0.0 or np.random.random() < np.exp(-delta * beta):
                    _apply(x, field, flips, nflip, indptr, indices, data)
                    energy += delta
        if energy < best_e:
            best_e = energy
            best_x[:] = x
    return best_x, best_e


def restart_seeds(seed: int, restarts: int) -> list[int]:
    """Per-restart seeds, fixed by the master seed regardless of execution order."""
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [int(c.generate_state(1, dtype=np.uint32)[0]) for c in children]


def solve_anneal(model: QuboModel, config: AnnealConfig | None = None) -> SolveReport:
    config = config or AnnealConfig()
    if model.num_vars < 1:
        raise SolverError("model has no variables")
    t0, t1 = default_temperatures(model)
    t_initial = config.t_initial if config.t_initial is not None else t0
    t_final = config.t_final if config.t_final is not None else min(t1, t_initial)
    if t_initial < t_final:
        raise SolverError("t_initial must be >= t_final")
    temps = np.geomspace(t_initial, t_final, config.sweeps) if config.sweeps > 1 else np.array([t_final])

    lin, Qu = model.dense()
    Qs = Qu + Qu.T
    indptr, indices, data = _neighbors(model)
    layout = model.layout if config.moves == "mixed" else None
    route, lo, hi, slack, coeffs, M = _layout_tables(layout)
    if layout is not None:
        w = np.zeros(layout.n + 1)
        if model.item_weights is not None:
            w[:] = model.item_weights
        n_moves = route.shape[0] * route.shape[1]
    else:
        w = np.zeros(1)
        n_moves = 0

    best_x, best_e = None, np.inf
    trajectory = []
    for r, s in enumerate(restart_seeds(config.seed, config.restarts)):
        x, _ = _anneal_run(
            lin, Qs, indptr, indices, data, float(model.offset), temps, s,
            route, lo, hi, slack, coeffs, w, float(M), n_moves,
        )
        # re-evaluate exactly; the incremental energy accumulates rounding
        xf = x.astype(float)
        e = float(model.offset + xf @ lin + xf @ Qu @ xf)
        if e < best_e:
            best_x, best_e = x.copy(), e
        trajectory.append(((r + 1) * config.sweeps, best_e))
    return SolveReport(best_x, best_e, trajectory, "anneal", config.seed)

