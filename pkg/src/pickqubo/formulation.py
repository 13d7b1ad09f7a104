"""QUBO encoding of the capacitated picking-and-batching problem.

Route variables ``x[t, i, p]`` say that robot ``p`` (1-based) stands on node
``i`` at step ``t``. Each robot also owns a small slack register that turns
``load <= M`` into the equality ``load + slack == M``.

Two layouts are supported:

* ``full``: every step ``t = 0..n+1`` carries variables, the start and end
  steps are pinned to the depot by penalties.
* ``reduced`` (default): steps ``0`` and ``n+1`` are fixed to the depot and
  carry no variables; their distance terms fold into linear coefficients.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .instance import Instance

log = logging.getLogger(__name__)

MODES = ("full", "reduced")


class FormulationError(ValueError):
    pass


def slack_bit_count(capacity: int) -> int:
    """ceil(log2(capacity)), computed exactly on integers."""
    return (int(capacity) - 1).bit_length()


def slack_coefficients(capacity: int) -> list[int]:
    """Capped binary expansion whose coefficients sum to exactly ``capacity``.

    >>> slack_coefficients(15)
    [1, 2, 4, 8]
    >>> slack_coefficients(45)
    [1, 2, 4, 8, 16, 14]
    """
    m = slack_bit_count(capacity)
    if m == 0:
        return []
    return [1 << b for b in range(m - 1)] + [int(capacity) - ((1 << (m - 1)) - 1)]


def slack_gaps(capacity: int) -> list[int]:
    """Values in ``0..capacity`` the slack register cannot represent.

    Non-empty exactly when ``capacity`` is a power of two.
    """
    reachable = {0}
    for c in slack_coefficients(capacity):
        reachable |= {r + c for r in reachable}
    return [v for v in range(int(capacity) + 1) if v not in reachable]


def _check_dims(n, K, M, mode):
    for name, v in (("n", n), ("K", K), ("M", M)):
        if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
            raise FormulationError(f"{name} must be a positive integer, got {v!r}")
    if mode not in MODES:
        raise FormulationError(f"mode must be one of {MODES}, got {mode!r}")


def qubit_count(n: int, K: int, M: int, mode: str = "reduced") -> int:
    _check_dims(n, K, M, mode)
    per_robot = (n + 1) * (n + 2) if mode == "full" else n * (n + 1)
    return K * per_robot + K * slack_bit_count(M)


@dataclass(frozen=True)
class EncodingLayout:
    """Bijection between (t, i, p) route variables, (p, b) slack bits and flat indices.

    Route bits are robot-major, then step, then node; slack bits follow all
    route bits, again robot-major.
    """

    n: int
    K: int
    M: int
    mode: str = "reduced"

    def __post_init__(self):
        _check_dims(self.n, self.K, self.M, self.mode)

    @property
    def time_steps(self) -> tuple[int, ...]:
        if self.mode == "full":
            return tuple(range(self.n + 2))
        return tuple(range(1, self.n + 1))

    @property
    def slack_bits_per_robot(self) -> int:
        return slack_bit_count(self.M)

    @property
    def slack_coefficients(self) -> list[int]:
        return slack_coefficients(self.M)

    @property
    def num_route_vars(self) -> int:
        return self.K * len(self.time_steps) * (self.n + 1)

    @property
    def num_vars(self) -> int:
        return self.num_route_vars + self.K * self.slack_bits_per_robot

    def route_index(self, t: int, i: int, p: int) -> int:
        steps = self.time_steps
        if not steps[0] <= t <= steps[-1]:
            raise KeyError(f"step {t} carries no variable in {self.mode} mode")
        if not 0 <= i <= self.n or not 1 <= p <= self.K:
            raise KeyError((t, i, p))
        return ((p - 1) * len(steps) + (t - steps[0])) * (self.n + 1) + i

    def slack_index(self, p: int, b: int) -> int:
        if not 1 <= p <= self.K or not 0 <= b < self.slack_bits_per_robot:
            raise KeyError((p, b))
        return self.num_route_vars + (p - 1) * self.slack_bits_per_robot + b

    def labels(self) -> list[tuple]:
        """Inverse map: ``labels()[k]`` is ``('x', t, i, p)`` or ``('s', p, b)``."""
        out = [None] * self.num_vars
        for p in range(1, self.K + 1):
            for t in self.time_steps:
                for i in range(self.n + 1):
                    out[self.route_index(t, i, p)] = ("x", t, i, p)
            for b in range(self.slack_bits_per_robot):
                out[self.slack_index(p, b)] = ("s", p, b)
        return out

    def route_block(self, bits: np.ndarray) -> np.ndarray:
        """Route bits reshaped to ``[..., robot, step, node]`` (robot and step 0-based)."""
        bits = np.asarray(bits)
        lead = bits.shape[:-1]
        return bits[..., : self.num_route_vars].reshape(*lead, self.K, len(self.time_steps), self.n + 1)

    def slack_block(self, bits: np.ndarray) -> np.ndarray:
        bits = np.asarray(bits)
        lead = bits.shape[:-1]
        return bits[..., self.num_route_vars :].reshape(*lead, self.K, self.slack_bits_per_robot)

    def encode_routes(self, routes: Sequence[Sequence[int]], weights: Sequence[float] | None = None) -> np.ndarray:
        """Bitstring for per-robot routes; each route is ``[0, ..., 0]``.

        Interior entries fill steps ``1..`` in order, remaining steps park at the
        depot. With ``weights`` (node-indexed, depot first) the slack register is
        set to ``M - load`` when that value is representable.
        """
        if len(routes) != self.K:
            raise FormulationError(f"expected {self.K} routes, got {len(routes)}")
        bits = np.zeros(self.num_vars, dtype=np.uint8)
        for p, route in enumerate(routes, start=1):
            route = list(route)
            if len(route) < 2 or route[0] != 0 or route[-1] != 0:
                raise FormulationError(f"route {route} must start and end at the depot")
            core = route[1:-1]
            if len(core) > self.n:
                raise FormulationError(f"route {route} needs more than {self.n} steps")
            core = core + [0] * (self.n - len(core))
            seq = [0, *core, 0] if self.mode == "full" else core
            for t, node in zip(self.time_steps, seq):
                bits[self.route_index(t, node, p)] = 1
            if weights is not None and self.slack_bits_per_robot:
                load = sum(weights[i] for i in core)
                s = int(round(self.M - load))
                value = _slack_bits_for(s, self.slack_coefficients)
                if value is not None:
                    for b, v in enumerate(value):
                        bits[self.slack_index(p, b)] = v
        return bits


def _slack_bits_for(value: int, coeffs: Sequence[int]) -> list[int] | None:
    """Bits of the capped expansion summing to ``value``, or None if unreachable."""
    m = len(coeffs)
    if value < 0 or value > sum(coeffs):
        return None
    top = coeffs[-1]
    low_max = sum(coeffs[:-1])
    if value <= low_max:
        return [(value >> b) & 1 for b in range(m - 1)] + [0]
    rest = value - top
    if 0 <= rest <= low_max:
        return [(rest >> b) & 1 for b in range(m - 1)] + [1]
    return None


def make_layout(n: int, K: int, M: int, mode: str = "reduced") -> EncodingLayout:
    return EncodingLayout(n, K, M, mode)


@dataclass(frozen=True)
class PenaltyWeights:
    lambda_route: float
    lambda_capacity: float

    def __post_init__(self):
        if not (self.lambda_route > 0 and self.lambda_capacity > 0):
            raise FormulationError("penalty weights must be strictly positive")

    @classmethod
    def auto(cls, instance: Instance) -> PenaltyWeights:
        """One violated constraint always outweighs the largest distance saving.

        A feasible solution costs at most ``2 n max(d)``; every violated term
        contributes at least its weight because all residuals are integers.
        """
        dmax = float(instance.distances.max()) if instance.distances.size else 0.0
        lam = 2 * (instance.n + 2) * dmax + 1
        return cls(lam, lam)


@dataclass(frozen=True, eq=False)
class QuboModel:
    """``offset + sum linear[i] x_i + sum quadratic[i, j] x_i x_j`` with ``i < j``."""

    num_vars: int
    linear: Mapping[int, float]
    quadratic: Mapping[tuple[int, int], float]
    offset: float = 0.0
    layout: EncodingLayout | None = None
    weights: PenaltyWeights | None = None
    # node-indexed weights the capacity term was built with (depot first)
    item_weights: tuple[int, ...] | None = None
    _dense: tuple = field(init=False, repr=False, default=None)

    def __post_init__(self):
        for (i, j), v in self.quadratic.items():
            if not 0 <= i < j < self.num_vars:
                raise FormulationError(f"quadratic key {(i, j)} is not strictly upper-triangular in range")
            if v == 0:
                raise FormulationError(f"stored zero at {(i, j)}")
        for i, v in self.linear.items():
            if not 0 <= i < self.num_vars:
                raise FormulationError(f"linear index {i} out of range")
            if v == 0:
                raise FormulationError(f"stored zero at {i}")

    def __eq__(self, other):
        if not isinstance(other, QuboModel):
            return NotImplemented
        return (
            self.num_vars == other.num_vars
            and dict(self.linear) == dict(other.linear)
            and dict(self.quadratic) == dict(other.quadratic)
            and self.offset == other.offset
        )

    __hash__ = None

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """(linear vector, strictly upper-triangular coupling matrix)."""
        if self._dense is None:
            lin = np.zeros(self.num_vars)
            for i, v in self.linear.items():
                lin[i] = v
            Q = np.zeros((self.num_vars, self.num_vars))
            for (i, j), v in self.quadratic.items():
                Q[i, j] = v
            object.__setattr__(self, "_dense", (lin, Q))
        return self._dense

    def coefficients(self) -> Iterator[float]:
        yield from self.linear.values()
        yield from self.quadratic.values()

    def __add__(self, other: QuboModel) -> QuboModel:
        if self.num_vars != other.num_vars:
            raise FormulationError("cannot add models of different sizes")
        b = _TermBuilder(self.num_vars)
        for m in (self, other):
            for i, v in m.linear.items():
                b.linear(i, v)
            for (i, j), v in m.quadratic.items():
                b.quadratic(i, j, v)
            b.constant(m.offset)
        return b.build(
            layout=self.layout or other.layout,
            weights=self.weights or other.weights,
            item_weights=self.item_weights or other.item_weights,
        )


class _TermBuilder:
    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self._lin: dict[int, float] = {}
        self._quad: dict[tuple[int, int], float] = {}
        self._offset = 0.0

    def linear(self, i: int, v: float):
        if v:
            self._lin[i] = self._lin.get(i, 0.0) + v

    def quadratic(self, i: int, j: int, v: float):
        if not v:
            return
        if i == j:  # x*x == x on binaries
            self.linear(i, v)
            return
        key = (i, j) if i < j else (j, i)
        self._quad[key] = self._quad.get(key, 0.0) + v

    def constant(self, v: float):
        self._offset += v

    def squared(self, terms: Sequence[tuple[int, float]], const: float, scale: float):
        """Add ``scale * (sum c_k x_k + const)**2``."""
        for a, (i, ci) in enumerate(terms):
            self.linear(i, scale * (ci * ci + 2 * const * ci))
            for j, cj in terms[a + 1 :]:
                self.quadratic(i, j, 2 * scale * ci * cj)
        self.constant(scale * const * const)

    def build(self, layout=None, weights=None, item_weights=None) -> QuboModel:
        lin = {i: v for i, v in sorted(self._lin.items()) if v != 0}
        quad = {k: v for k, v in sorted(self._quad.items()) if v != 0}
        return QuboModel(self.num_vars, lin, quad, self._offset, layout, weights, item_weights)


def _check_match(instance: Instance, layout: EncodingLayout):
    if (instance.n, instance.fleet_size, instance.capacity) != (layout.n, layout.K, layout.M):
        raise FormulationError(
            f"layout (n={layout.n}, K={layout.K}, M={layout.M}) does not match instance "
            f"(n={instance.n}, K={instance.fleet_size}, M={instance.capacity})"
        )


def build_objective(instance: Instance, layout: EncodingLayout) -> QuboModel:
    """Total travelled distance over consecutive steps of every robot."""
    _check_match(instance, layout)
    d = instance.distances
    n = layout.n
    nodes = range(n + 1)
    b = _TermBuilder(layout.num_vars)
    for p in range(1, layout.K + 1):
        if layout.mode == "full":
            pairs = range(1, n + 2)
        else:
            pairs = range(2, n + 1)
            for j in nodes:
                b.linear(layout.route_index(1, j, p), d[0, j])
                b.linear(layout.route_index(n, j, p), d[j, 0])
        for t in pairs:
            for i in nodes:
                for j in nodes:
                    b.quadratic(layout.route_index(t - 1, i, p), layout.route_index(t, j, p), d[i, j])
    return b.build(layout=layout)


def build_constraints(instance: Instance, layout: EncodingLayout, weights: PenaltyWeights) -> QuboModel:
    """Squared penalties for position, visit-once, capacity and (full mode) depot boundary."""
    _check_match(instance, layout)
    if not instance.has_integer_weights():
        raise FormulationError("capacity slack encoding needs integer weights; normalize the batch weights")
    n, K, M = layout.n, layout.K, layout.M
    lam, lam_cap = weights.lambda_route, weights.lambda_capacity
    w = [int(x) for x in instance.weights]
    steps = layout.time_steps
    b = _TermBuilder(layout.num_vars)

    # one node per robot per step
    for p in range(1, K + 1):
        for t in steps:
            b.squared([(layout.route_index(t, i, p), 1.0) for i in range(n + 1)], -1.0, lam)
    # every product visited exactly once by the whole fleet
    for i in range(1, n + 1):
        b.squared([(layout.route_index(t, i, p), 1.0) for p in range(1, K + 1) for t in steps], -1.0, lam)
    # load + slack == M per robot
    coeffs = layout.slack_coefficients
    for p in range(1, K + 1):
        terms = [(layout.route_index(t, i, p), float(w[i])) for t in steps for i in range(1, n + 1) if w[i]]
        terms += [(layout.slack_index(p, k), float(c)) for k, c in enumerate(coeffs)]
        b.squared(terms, -float(M), lam_cap)
    if layout.mode == "full":
        for p in range(1, K + 1):
            b.squared([(layout.route_index(0, 0, p), 1.0)], -1.0, lam)
            b.squared([(layout.route_index(n + 1, 0, p), 1.0)], -1.0, lam)
    return b.build(layout=layout, weights=weights, item_weights=tuple(w))


def assemble_qubo(instance: Instance, mode: str = "reduced", weights: PenaltyWeights | None = None) -> QuboModel:
    layout = make_layout(instance.n, instance.fleet_size, instance.capacity, mode)
    if weights is None:
        weights = PenaltyWeights.auto(instance)
    gaps = slack_gaps(instance.capacity)
    if gaps:
        log.warning(
            "capacity %d is a power of two: slack cannot represent %s, so loads of %s have no zero-penalty encoding",
            instance.capacity,
            gaps,
            [instance.capacity - g for g in gaps],
        )
    model = build_objective(instance, layout) + build_constraints(instance, layout, weights)
    return QuboModel(model.num_vars, model.linear, model.quadratic, model.offset, layout, weights, model.item_weights)


def _as_bits(bits, num_vars: int) -> np.ndarray:
    x = np.asarray(bits)
    if x.shape[-1:] != (num_vars,):
        raise FormulationError(f"expected {num_vars} bits, got shape {x.shape}")
    if not np.all((x == 0) | (x == 1)):
        raise FormulationError("bits must be 0 or 1")
    return x


def qubo_energy(model: QuboModel, bits: Iterable[int]) -> float:
    x = _as_bits(list(bits) if not isinstance(bits, np.ndarray) else bits, model.num_vars)
    total = model.offset
    for i, v in model.linear.items():
        if x[i]:
            total += v
    for (i, j), v in model.quadratic.items():
        if x[i] and x[j]:
            total += v
    return float(total)


def qubo_energies(model: QuboModel, bits: np.ndarray) -> np.ndarray:
    """Vectorized energies for a ``[batch, num_vars]`` 0/1 array."""
    x = _as_bits(bits, model.num_vars).astype(float)
    lin, Q = model.dense()
    return model.offset + x @ lin + np.einsum("bi,bi->b", x @ Q, x)
