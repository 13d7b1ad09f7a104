"""Warehouse picking instances: nodes, weights, fleet, and distance matrices.

Node 0 is always the depot. Instances are immutable once built.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

METRICS = ("explicit", "euclidean", "manhattan")
_DOC_KEYS = {"name", "capacity", "robots", "metric", "nodes", "distances"}
_NODE_KEYS = {"id", "weight", "pos"}


class InstanceError(ValueError):
    """Invalid instance data. ``field`` names the offending document field."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class InstanceParseError(InstanceError):
    """The document is not well-formed JSON of the expected shape."""


@dataclass(frozen=True)
class Node:
    id: int
    weight: float = 0
    position: tuple[float, float] | None = None


@dataclass(frozen=True, eq=False)
class Instance:
    nodes: tuple[Node, ...]
    distances: np.ndarray
    fleet_size: int
    capacity: int
    metric: str = "explicit"
    name: str = ""
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        nodes = tuple(self.nodes)
        object.__setattr__(self, "nodes", nodes)
        d = np.array(self.distances, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "distances", d)
        _validate(self)
        w = np.array([node.weight for node in nodes], dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "_weights", w)

    @property
    def n(self) -> int:
        """Number of products (nodes other than the depot)."""
        return len(self.nodes) - 1

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def has_positions(self) -> bool:
        return all(node.position is not None for node in self.nodes)

    def has_integer_weights(self) -> bool:
        return all(float(node.weight).is_integer() for node in self.nodes)

    def with_fleet(self, fleet_size: int) -> Instance:
        return Instance(self.nodes, self.distances, fleet_size, self.capacity, self.metric, self.name)

    def with_distances(self, distances) -> Instance:
        return Instance(self.nodes, distances, self.fleet_size, self.capacity, "explicit", self.name)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.fleet_size == other.fleet_size
            and self.capacity == other.capacity
            and self.metric == other.metric
            and self.name == other.name
            and np.array_equal(self.distances, other.distances)
        )

    __hash__ = None


def build_distance_matrix(positions: Sequence[Sequence[float]], metric: str = "euclidean") -> np.ndarray:
    """Pairwise distances between 2-D points under ``euclidean`` or ``manhattan``."""
    if metric not in ("euclidean", "manhattan"):
        raise InstanceError(f"unsupported metric {metric!r}", "metric")
    pts = np.asarray(positions, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] != 2:
        raise InstanceError("expected a non-empty list of 2-D points", "pos")
    if not np.all(np.isfinite(pts)):
        raise InstanceError("coordinates must be finite", "pos")
    diff = pts[:, None, :] - pts[None, :, :]
    if metric == "euclidean":
        d = np.sqrt(np.sum(diff * diff, axis=-1))
    else:
        d = np.sum(np.abs(diff), axis=-1)
    # exact symmetry: rounding in the subtraction is already symmetric, keep it explicit
    d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0.0)
    return d


def _validate(inst: Instance) -> None:
    nodes = inst.nodes
    if len(nodes) < 1:
        raise InstanceError("at least the depot is required", "nodes")
    seen = set()
    for k, node in enumerate(nodes):
        if node.id in seen:
            raise InstanceError(f"duplicate id {node.id}", f"nodes[{k}].id")
        seen.add(node.id)
        if node.id != k:
            if k == 0:
                raise InstanceError("the depot (id 0) must be listed first", "nodes[0].id")
            raise InstanceError(f"expected id {k}, got {node.id}; ids must be 0..n in order", f"nodes[{k}].id")
        if not math.isfinite(node.weight) or node.weight < 0:
            raise InstanceError(f"weight must be a finite non-negative number, got {node.weight}", f"nodes[{k}].weight")
    if nodes[0].weight != 0:
        raise InstanceError("depot weight must be 0", "nodes[0].weight")
    if isinstance(inst.fleet_size, bool) or not isinstance(inst.fleet_size, (int, np.integer)) or inst.fleet_size < 1:
        raise InstanceError("must be a positive integer", "robots")
    if isinstance(inst.capacity, bool) or not isinstance(inst.capacity, (int, np.integer)) or inst.capacity < 1:
        raise InstanceError("must be a positive integer", "capacity")
    if inst.metric not in METRICS:
        raise InstanceError(f"must be one of {METRICS}", "metric")

    d = inst.distances
    size = len(nodes)
    if d.shape != (size, size):
        raise InstanceError(f"expected a {size}x{size} matrix, got shape {d.shape}", "distances")
    if not np.all(np.isfinite(d)):
        i, j = np.argwhere(~np.isfinite(d))[0]
        raise InstanceError("entries must be finite", f"distances[{i}][{j}]")
    if np.any(d < 0):
        i, j = np.argwhere(d < 0)[0]
        raise InstanceError("entries must be non-negative", f"distances[{i}][{j}]")
    if np.any(np.diag(d) != 0):
        i = int(np.flatnonzero(np.diag(d))[0])
        raise InstanceError("diagonal must be zero", f"distances[{i}][{i}]")
    if not np.array_equal(d, d.T):
        i, j = np.argwhere(d != d.T)[0]
        raise InstanceError(f"matrix is not symmetric ({d[i, j]} != {d[j, i]})", f"distances[{i}][{j}]")

    if inst.metric != "explicit":
        if not inst.has_positions:
            k = next(k for k, node in enumerate(nodes) if node.position is None)
            raise InstanceError(f"metric {inst.metric!r} requires a position on every node", f"nodes[{k}].pos")
        expected = build_distance_matrix([node.position for node in nodes], inst.metric)
        if not np.allclose(d, expected, rtol=0, atol=1e-9):
            raise InstanceError(f"distances disagree with the {inst.metric} metric", "distances")


def make_instance(
    weights: Sequence[float],
    capacity: int,
    robots: int,
    *,
    distances=None,
    positions=None,
    metric: str | None = None,
    name: str = "",
) -> Instance:
    """Convenience constructor. ``weights`` lists products 1..n (depot excluded)."""
    if metric is None:
        metric = "explicit" if distances is not None else "euclidean"
    all_weights = [0, *weights]
    pos = [None] * len(all_weights) if positions is None else [tuple(map(float, p)) for p in positions]
    if len(pos) != len(all_weights):
        raise InstanceError("one position per node (depot first) is required", "pos")
    nodes = tuple(Node(k, w, p) for k, (w, p) in enumerate(zip(all_weights, pos)))
    if distances is None:
        if metric == "explicit":
            raise InstanceError("explicit metric needs a distance matrix", "distances")
        distances = build_distance_matrix(pos, metric)
    return Instance(nodes, distances, robots, capacity, metric, name)


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(f"expected a number, got {value!r}", where)
    return value


def instance_from_dict(doc: dict, *, integer_weights: bool = True) -> Instance:
    """Build and validate an instance from a parsed document.

    With ``integer_weights`` (the default) fractional weights are rejected: the
    capacity slack register can only balance integer loads, so normalize the
    batch weights to integers first.
    """
    if not isinstance(doc, dict):
        raise InstanceParseError("top level must be an object")
    unknown = sorted(set(doc) - _DOC_KEYS)
    if unknown:
        raise InstanceError(f"unknown key(s) {unknown}", unknown[0])
    for key in ("capacity", "robots", "metric", "nodes"):
        if key not in doc:
            raise InstanceError("missing required key", key)
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise InstanceError("must be a string", "name")
    for key in ("capacity", "robots"):
        if isinstance(doc[key], bool) or not isinstance(doc[key], int):
            raise InstanceError(f"must be an integer, got {doc[key]!r}", key)
    metric = doc["metric"]
    if metric not in METRICS:
        raise InstanceError(f"must be one of {METRICS}, got {metric!r}", "metric")
    raw_nodes = doc["nodes"]
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise InstanceError("must be a non-empty array", "nodes")

    nodes = []
    for k, raw in enumerate(raw_nodes):
        where = f"nodes[{k}]"
        if not isinstance(raw, dict):
            raise InstanceError("must be an object", where)
        extra = sorted(set(raw) - _NODE_KEYS)
        if extra:
            raise InstanceError(f"unknown key(s) {extra}", f"{where}.{extra[0]}")
        if "id" not in raw or isinstance(raw["id"], bool) or not isinstance(raw["id"], int):
            raise InstanceError("must be an integer", f"{where}.id")
        weight = _number(raw.get("weight", 0), f"{where}.weight")
        if integer_weights and isinstance(weight, float) and not weight.is_integer():
            raise InstanceError(
                f"weight {weight} is not an integer; the capacity slack encoding needs integer "
                "weights (normalize the batch weights)",
                f"{where}.weight",
            )
        pos = raw.get("pos")
        if pos is not None:
            if not isinstance(pos, list) or len(pos) != 2:
                raise InstanceError("must be [x, y]", f"{where}.pos")
            pos = tuple(float(_number(c, f"{where}.pos")) for c in pos)
            if not all(math.isfinite(c) for c in pos):
                raise InstanceError("coordinates must be finite", f"{where}.pos")
        nodes.append(Node(raw["id"], weight, pos))

    if metric == "explicit":
        if "distances" not in doc:
            raise InstanceError("required when metric is 'explicit'", "distances")
        rows = doc["distances"]
        if not isinstance(rows, list) or any(not isinstance(r, list) or len(r) != len(rows) for r in rows):
            raise InstanceError("must be a square array", "distances")
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                _number(v, f"distances[{i}][{j}]")
        distances = np.array(rows, dtype=float).reshape(len(rows), len(rows))
    else:
        if "distances" in doc:
            raise InstanceError(f"not allowed with metric {metric!r}; it is derived from positions", "distances")
        missing = [k for k, node in enumerate(nodes) if node.position is None]
        if missing:
            raise InstanceError(f"metric {metric!r} requires a position", f"nodes[{missing[0]}].pos")
        distances = build_distance_matrix([node.position for node in nodes], metric)

    return Instance(tuple(nodes), distances, doc["robots"], doc["capacity"], metric, name)


def load_instance(text: str, *, integer_weights: bool = True) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(doc, integer_weights=integer_weights)


def read_instance(path, *, integer_weights: bool = True) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return load_instance(fh.read(), integer_weights=integer_weights)


def _plain(x: float):
    return int(x) if isinstance(x, (int, np.integer)) else float(x)


def instance_to_dict(inst: Instance) -> dict:
    nodes = []
    for node in inst.nodes:
        entry = {"id": node.id, "weight": _plain(node.weight)}
        if node.position is not None:
            entry["pos"] = [float(node.position[0]), float(node.position[1])]
        nodes.append(entry)
    doc = {
        "name": inst.name,
        "capacity": int(inst.capacity),
        "robots": int(inst.fleet_size),
        "metric": inst.metric,
        "nodes": nodes,
    }
    if inst.metric == "explicit":
        doc["distances"] = [[_plain_distance(v) for v in row] for row in inst.distances]
    return doc


def _plain_distance(v: float):
    return int(v) if float(v).is_integer() else float(v)


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2) + "\n"


def bundled_instance_path(name: str):
    """Path to a fixture shipped with the package (``fig5`` or ``fig7``)."""
    from importlib.resources import files

    stem = name[:-5] if name.endswith(".json") else name
    return files("pickqubo") / "data" / f"{stem}.json"


def resolve_instance(path_or_name: str, *, integer_weights: bool = True) -> Instance:
    """Read an instance from a file, falling back to the bundled fixtures by name."""
    import os

    if os.path.exists(path_or_name):
        return read_instance(path_or_name, integer_weights=integer_weights)
    bundled = bundled_instance_path(os.path.basename(path_or_name))
    if bundled.is_file():
        return load_instance(bundled.read_text(encoding="utf-8"), integer_weights=integer_weights)
    raise FileNotFoundError(path_or_name)
