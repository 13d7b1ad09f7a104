import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_instance, toy
from pickqubo.decode import (
    ROUTE_KINDS,
    Solution,
    decode,
    dump_solution,
    feasible_mask,
    load_solution,
    route_distance,
    validate,
)
from pickqubo.formulation import assemble_qubo, make_layout, qubo_energy
from pickqubo.instance import resolve_instance
from pickqubo.oracle import oracle_optimum
from pickqubo.solvers import solve_exact


def test_single_product_route():
    inst = toy([2], 5, d=[[0, 3], [3, 0]])
    layout = make_layout(1, 1, 5)
    bits = np.zeros(layout.num_vars, dtype=np.uint8)
    bits[layout.route_index(1, 1, 1)] = 1
    # slack 3 = 1 + 2
    bits[layout.slack_index(1, 0)] = 1
    bits[layout.slack_index(1, 1)] = 1
    sol = decode(bits, layout, inst)
    assert sol.routes == ((0, 1, 0),)
    assert sol.total_distance == 6
    assert sol.feasibility.ok
    assert sol.loads == (2.0,)


def test_all_route_bits_zero():
    inst = toy([1, 1], 3, K=2)
    layout = make_layout(2, 2, 3)
    sol = decode(np.zeros(layout.num_vars, dtype=np.uint8), layout, inst)
    assert sol.routes == ((0, 0), (0, 0))
    assert sol.robots_used == 0
    missed = [v for v in sol.feasibility.violations if v.kind == "missed-product"]
    assert [v.product for v in missed] == [1, 2]
    assert not sol.feasibility.ok


def test_fig5_exact_matches_oracle():
    inst = resolve_instance("fig5").with_fleet(1)
    model = assemble_qubo(inst)
    report = solve_exact(model, max_vars=26)
    sol = decode(report.best, model.layout, inst, report.energy)
    assert sol.feasibility.ok
    assert sorted(sol.routes[0][1:-1]) == [1, 2, 3, 4]
    assert sol.loads == (22.0,)
    assert abs(sol.total_distance - oracle_optimum(inst).optimal_distance) <= 1e-9


def test_route_distance():
    inst = toy([1, 1], 3)
    assert route_distance([0, 0], inst) == 0
    assert route_distance([0, 1, 0], inst) == 2
    assert route_distance([0, 1, 2, 0], inst) == 6
    with pytest.raises(ValueError):
        route_distance([0, 3, 0], inst)


def test_validate_examples():
    inst = toy([1], 1, K=2)
    ok = validate(Solution(((0, 1, 0), (0, 0)), (1, 0), 2, None), inst)
    assert ok.ok
    dup = validate(Solution(((0, 1, 0), (0, 1, 0)), (1, 1), 4, None), inst)
    assert [(v.kind, v.product) for v in dup.violations] == [("duplicated-product", 1)]
    heavy = toy([4], 3)
    over = validate(Solution(((0, 1, 0),), (4,), 2, None), heavy)
    assert [(v.kind, v.magnitude) for v in over.violations] == [("capacity-exceeded", 1)]


def test_validate_boundary():
    inst = toy([1], 3)
    rep = validate(Solution(((1, 0),), (1,), 1, None), inst)
    assert "bad-boundary" in rep.kinds()


def test_interior_depot_kept_and_parking_stripped():
    inst = toy([1, 1], 5)
    layout = make_layout(2, 1, 5)
    bits = np.zeros(layout.num_vars, dtype=np.uint8)
    bits[layout.route_index(1, 0, 1)] = 1  # parked first
    bits[layout.route_index(2, 2, 1)] = 1
    sol = decode(bits, layout, inst)
    assert sol.routes == ((0, 2, 0),)
    inst3 = random_instance(np.random.default_rng(1), 3, 1, 7, weights=[1, 1, 1])
    layout3 = make_layout(3, 1, 7)
    bits3 = layout3.encode_routes([[0, 1, 0, 2, 0]])
    assert decode(bits3, layout3, inst3).routes == ((0, 1, 0, 2, 0),)


def test_multi_position_and_slack_mismatch():
    inst = toy([1, 1], 3)
    layout = make_layout(2, 1, 3)
    bits = np.zeros(layout.num_vars, dtype=np.uint8)
    bits[layout.route_index(1, 1, 1)] = 1
    bits[layout.route_index(1, 2, 1)] = 1
    sol = decode(bits, layout, inst)
    kinds = sol.feasibility.kinds()
    assert "multi-position" in kinds  # two nodes at t=1 and none at t=2
    assert "slack-mismatch" in kinds  # load 2, slack 0, capacity 3
    assert sol.routes == ((0, 1, 2, 0),)


def test_length_mismatch():
    with pytest.raises(ValueError):
        decode([0, 1], make_layout(1, 1, 3), toy([1], 3))


def _bits_strategy(layout):
    return st.lists(st.integers(0, 1), min_size=layout.num_vars, max_size=layout.num_vars)


CASES = [
    (toy([1, 2], 3, K=2), "reduced"),
    (toy([1, 1], 5), "full"),
    (toy([2], 3, K=2), "full"),
]


@pytest.mark.parametrize("inst, mode", CASES)
def test_feasible_mask_matches_decode(inst, mode):
    layout = make_layout(inst.n, inst.fleet_size, inst.capacity, mode)
    rng = np.random.default_rng(7)
    bits = rng.integers(0, 2, size=(400, layout.num_vars)).astype(np.uint8)
    # plant some feasible ones
    planted = [layout.encode_routes([[0, *range(1, inst.n + 1), 0]] + [[0, 0]] * (inst.fleet_size - 1), inst.weights)]
    bits = np.vstack([bits, planted])
    mask = feasible_mask(bits, layout, inst)
    assert mask[-1]
    for x, ok in zip(bits, mask):
        assert decode(x, layout, inst).feasibility.ok == ok


@pytest.mark.parametrize("inst, mode", CASES)
def test_validate_agrees_with_decode(inst, mode):
    layout = make_layout(inst.n, inst.fleet_size, inst.capacity, mode)
    rng = np.random.default_rng(11)
    for x in rng.integers(0, 2, size=(300, layout.num_vars)).astype(np.uint8):
        sol = decode(x, layout, inst)
        assert validate(sol, inst) == sol.feasibility.restricted(ROUTE_KINDS)


@given(st.integers(0, 2**32 - 1))
def test_energy_equals_distance_when_feasible(seed):
    rng = np.random.default_rng(seed)
    n, K = int(rng.integers(1, 4)), int(rng.integers(1, 3))
    inst = random_instance(rng, n, K, 7, max_weight=3)
    mode = str(rng.choice(["full", "reduced"]))
    model = assemble_qubo(inst, mode)
    owner = rng.integers(0, K, size=n)
    routes = [[0, *[i + 1 for i in range(n) if owner[i] == p], 0] for p in range(K)]
    bits = model.layout.encode_routes(routes, inst.weights)
    sol = decode(bits, model.layout, inst)
    if sol.feasibility.ok:
        assert abs(qubo_energy(model, bits) - sol.total_distance) <= 1e-9
        assert validate(sol, inst) == sol.feasibility


def test_solution_document_round_trip():
    inst = toy([1], 1, K=2)
    sol = Solution(((0, 1, 0), (0, 0)), (1.0, 0.0), 2.0, 2.0, validate(Solution(((0, 1, 0), (0, 0)), (1, 0), 2, None), inst))
    text = dump_solution(sol, "exact", 3)
    back, doc = load_solution(text)
    assert back.routes == sol.routes and doc["solver"] == "exact" and doc["seed"] == 3
    assert doc["feasible"] is True
    assert validate(back, inst).ok == doc["feasible"]
    assert dump_solution(back, "exact", 3) == text
