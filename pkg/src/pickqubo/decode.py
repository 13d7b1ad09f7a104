"""Turn bit assignments back into robot routes and check them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .formulation import EncodingLayout
from .instance import Instance

# Ordering of kinds in a report. ``slack-mismatch`` is an encoding-level kind:
# the routes respect capacity but the slack register does not balance the load.
KINDS = (
    "bad-boundary",
    "multi-position",
    "missed-product",
    "duplicated-product",
    "capacity-exceeded",
    "slack-mismatch",
)
# Kinds visible from routes alone.
ROUTE_KINDS = ("bad-boundary", "missed-product", "duplicated-product", "capacity-exceeded")


@dataclass(frozen=True)
class Violation:
    kind: str
    robot: int | None = None
    time: int | None = None
    product: int | None = None
    magnitude: float = 1.0

    def sort_key(self):
        return (KINDS.index(self.kind), self.robot or 0, self.time or 0, self.product or 0)

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for key in ("robot", "time", "product"):
            v = getattr(self, key)
            if v is not None:
                d[key] = v
        d["magnitude"] = _num(self.magnitude)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Violation:
        return cls(d["kind"], d.get("robot"), d.get("time"), d.get("product"), d.get("magnitude", 1.0))


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def restricted(self, kinds: Sequence[str]) -> FeasibilityReport:
        return FeasibilityReport(tuple(v for v in self.violations if v.kind in kinds))


def _report(violations) -> FeasibilityReport:
    return FeasibilityReport(tuple(sorted(violations, key=Violation.sort_key)))


@dataclass(frozen=True)
class Solution:
    routes: tuple[tuple[int, ...], ...]
    loads: tuple[float, ...]
    total_distance: float
    energy: float | None
    feasibility: FeasibilityReport = field(default_factory=FeasibilityReport)

    @property
    def robots_used(self) -> int:
        return sum(1 for r in self.routes if any(node != 0 for node in r))


def route_distance(route: Sequence[int], instance: Instance) -> float:
    size = instance.n + 1
    for node in route:
        if not 0 <= node < size:
            raise ValueError(f"unknown node id {node}")
    d = instance.distances
    return float(sum(d[a, b] for a, b in zip(route, route[1:])))


def route_load(route: Sequence[int], instance: Instance) -> float:
    w = instance.weights
    return float(sum(w[node] for node in route))


def _canonical(sequence: list[int]) -> tuple[int, ...]:
    """Strip leading/trailing parking; interior depot returns stay."""
    lo, hi = 0, len(sequence)
    while lo < hi and sequence[lo] == 0:
        lo += 1
    while hi > lo and sequence[hi - 1] == 0:
        hi -= 1
    return (0, *sequence[lo:hi], 0)


def decode(bits, layout: EncodingLayout, instance: Instance, energy: float | None = None) -> Solution:
    """Read per-robot routes from ``bits`` and report every violated condition.

    A step with several set nodes contributes all of them in ascending id order
    (depot dropped when a product is also set); a step with none reads as the
    depot. Both are recorded as ``multi-position``. In full mode the two
    boundary steps are kept verbatim at the ends of the route, so a product
    read there shows up as ``bad-boundary`` at route position 0 or -1.
    """
    x = np.asarray(bits)
    if x.shape != (layout.num_vars,):
        raise ValueError(f"expected {layout.num_vars} bits, got shape {x.shape}")
    route_bits = layout.route_block(x)
    slack_bits = layout.slack_block(x)
    steps = layout.time_steps
    coeffs = np.array(layout.slack_coefficients, dtype=float)
    w = instance.weights
    n, M = layout.n, layout.M

    violations = []
    routes, loads = [], []
    visits = np.zeros(n + 1, dtype=int)
    full = layout.mode == "full"
    for p in range(layout.K):
        reads = []
        for k, t in enumerate(steps):
            on = [int(i) for i in np.flatnonzero(route_bits[p, k])]
            if len(on) != 1:
                violations.append(Violation("multi-position", p + 1, t, None, abs(len(on) - 1)))
            products = [i for i in on if i != 0]
            reads.append(products if products else [0])
            for i in products:
                visits[i] += 1
        if full:
            core = _canonical([i for r in reads[1:-1] for i in r])[1:-1]
            route = (*reads[0], *core, *reads[-1])
            if route[0] != 0:
                violations.append(Violation("bad-boundary", p + 1, 0, None, 1))
            if route[-1] != 0:
                violations.append(Violation("bad-boundary", p + 1, len(route) - 1, None, 1))
        else:
            route = _canonical([i for r in reads for i in r])
        load = float(np.dot(route_bits[p].sum(axis=0)[1:], w[1:]))
        slack = float(np.dot(slack_bits[p], coeffs)) if coeffs.size else 0.0
        if load > M:
            violations.append(Violation("capacity-exceeded", p + 1, None, None, load - M))
        elif load + slack != M:
            violations.append(Violation("slack-mismatch", p + 1, None, None, abs(load + slack - M)))
        routes.append(route)
        loads.append(load)
    for i in range(1, n + 1):
        if visits[i] == 0:
            violations.append(Violation("missed-product", None, None, i, 1))
        elif visits[i] > 1:
            violations.append(Violation("duplicated-product", None, None, i, int(visits[i] - 1)))

    total = sum(route_distance(r, instance) for r in routes)
    return Solution(tuple(routes), tuple(loads), total, energy, _report(violations))


def validate(solution: Solution, instance: Instance) -> FeasibilityReport:
    """Re-derive route-level feasibility from the routes alone."""
    M = instance.capacity
    violations = []
    visits = np.zeros(instance.n + 1, dtype=int)
    for p, route in enumerate(solution.routes, start=1):
        if len(route) < 2 or route[0] != 0:
            violations.append(Violation("bad-boundary", p, 0, None, 1))
        if len(route) < 2 or route[-1] != 0:
            violations.append(Violation("bad-boundary", p, max(len(route) - 1, 0), None, 1))
        for node in route:
            if node != 0:
                visits[node] += 1
        load = route_load(route, instance)
        if load > M:
            violations.append(Violation("capacity-exceeded", p, None, None, load - M))
    for i in range(1, instance.n + 1):
        if visits[i] == 0:
            violations.append(Violation("missed-product", None, None, i, 1))
        elif visits[i] > 1:
            violations.append(Violation("duplicated-product", None, None, i, int(visits[i] - 1)))
    return _report(violations)


def feasible_mask(bits: np.ndarray, layout: EncodingLayout, instance: Instance) -> np.ndarray:
    """Batched ``decode(...).feasibility.ok`` for a ``[batch, num_vars]`` array."""
    x = np.asarray(bits)
    rb = layout.route_block(x).astype(np.int64)  # [B, K, T, n+1]
    sb = layout.slack_block(x).astype(np.int64)
    coeffs = np.array(layout.slack_coefficients, dtype=np.int64)
    w = np.array([int(v) for v in instance.weights], dtype=np.int64)

    ok = np.all(rb.sum(axis=-1) == 1, axis=(1, 2))
    if layout.mode == "full":
        ok &= np.all(rb[:, :, 0, 0] == 1, axis=1) & np.all(rb[:, :, -1, 0] == 1, axis=1)
    visits = rb[..., 1:].sum(axis=(1, 2))
    ok &= np.all(visits == 1, axis=1)
    loads = rb.sum(axis=2)[..., 1:] @ w[1:]  # [B, K]
    slack = sb @ coeffs if coeffs.size else np.zeros_like(loads)
    ok &= np.all(loads + slack == layout.M, axis=1)
    return ok


def _num(v):
    v = float(v)
    return int(v) if v.is_integer() else v


def solution_to_dict(solution: Solution, solver: str = "", seed: int | None = None) -> dict:
    return {
        "routes": [list(r) for r in solution.routes],
        "loads": [_num(v) for v in solution.loads],
        "total_distance": float(solution.total_distance),
        "energy": None if solution.energy is None else float(solution.energy),
        "feasible": solution.feasibility.ok,
        "violations": [v.to_dict() for v in solution.feasibility.violations],
        "solver": solver,
        "seed": seed,
    }


def dump_solution(solution: Solution, solver: str = "", seed: int | None = None) -> str:
    return json.dumps(solution_to_dict(solution, solver, seed), indent=2) + "\n"


def load_solution(text: str) -> tuple[Solution, dict]:
    """Parse a solution document; returns the Solution and the raw document."""
    doc = json.loads(text)
    routes = tuple(tuple(int(v) for v in r) for r in doc["routes"])
    report = _report(Violation.from_dict(v) for v in doc.get("violations", []))
    if bool(doc.get("feasible", report.ok)) != report.ok:
        raise ValueError("'feasible' disagrees with the violation list")
    sol = Solution(routes, tuple(doc["loads"]), doc["total_distance"], doc.get("energy"), report)
    return sol, doc
