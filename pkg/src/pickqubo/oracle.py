"""Brute-force capacitated routing optimum for small instances.

Searches routes directly (never bitstrings): every assignment of products to
robots, every visiting order per robot, single trip per robot.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product

from .instance import Instance

MAX_PRODUCTS = 8
MAX_ROBOTS = 4


class OracleError(ValueError):
    pass


class InstanceTooLarge(OracleError):
    pass


class InfeasibleInstance(OracleError):
    pass


@dataclass(frozen=True)
class OracleResult:
    optimal_distance: float
    routes: tuple[tuple[int, ...], ...]
    assignments_searched: int


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def oracle_optimum(instance: Instance) -> OracleResult:
    n, K, M = instance.n, instance.fleet_size, instance.capacity
    if n > MAX_PRODUCTS or K > MAX_ROBOTS:
        raise InstanceTooLarge(f"oracle handles n <= {MAX_PRODUCTS}, K <= {MAX_ROBOTS}; got n={n}, K={K}")
    d = instance.distances.tolist()
    w = instance.weights.tolist()

    @lru_cache(maxsize=None)
    def best_tour(subset: tuple[int, ...]) -> tuple[float, tuple[int, ...]]:
        if not subset:
            return 0.0, (0, 0)
        best = None
        # permutations of a sorted tuple come out in lexicographic order,
        # so the first tour at the minimum is the lexicographically smallest
        for order in permutations(subset):
            route = (0, *order, 0)
            dist = sum(d[a][b] for a, b in zip(route, route[1:]))
            if best is None or (dist < best[0] and not _close(dist, best[0])):
                best = (dist, route)
        return best

    best_dist, best_routes = None, None
    searched = 0
    for assign in product(range(K), repeat=n):
        searched += 1
        groups = [[] for _ in range(K)]
        for item, robot in enumerate(assign, start=1):
            groups[robot].append(item)
        if any(sum(w[i] for i in g) > M for g in groups):
            continue
        tours = [best_tour(tuple(g)) for g in groups]
        dist = sum(t[0] for t in tours)
        routes = tuple(t[1] for t in tours)
        if best_dist is None or (dist < best_dist and not _close(dist, best_dist)):
            best_dist, best_routes = dist, routes
        elif _close(dist, best_dist) and routes < best_routes:
            best_routes = routes
    if best_dist is None:
        raise InfeasibleInstance("no assignment of products to robots respects the capacity")
    return OracleResult(float(best_dist), best_routes, searched)
