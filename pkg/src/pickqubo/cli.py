"""Command-line entry point.

Exit codes: 0 feasible solution, 2 infeasible best-found (or infeasible
instance for ``oracle``), 1 usage, parse or validation errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
import time

from .decode import Solution, decode, dump_solution, load_solution, route_distance, route_load, validate
from .formulation import PenaltyWeights, assemble_qubo, qubit_count
from .instance import InstanceError, resolve_instance
from .ising import to_ising
from .oracle import InfeasibleInstance, InstanceTooLarge, oracle_optimum
from .plot import PlotError, render_svg
from .solvers import AnnealConfig, SolverError, VqeConfig, solve_anneal, solve_exact, solve_vqe

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

TABLE_ROWS = {
    # (items, capacity, mode) per row, one robot
    "tab1": [(n, 45, "full") for n in range(2, 13)],
    "tab2": [(n, 15, "reduced") for n in range(2, 10)] + [(n, 25, "reduced") for n in range(10, 13)],
}
SCENARIOS = {"fig5": ("fig5", (1, 2, 3)), "fig7": ("fig7", (1, 2, 3, 4))}
BENCH_HEADER = ["items", "robots", "mode", "qubits", "solver", "energy", "distance", "oracle_distance", "match", "wall_ms"]


class CliError(Exception):
    pass


def _load(args):
    try:
        inst = resolve_instance(args.instance)
    except FileNotFoundError:
        raise CliError(f"instance file not found: {args.instance}")
    if getattr(args, "robots_override", None) is not None:
        inst = inst.with_fleet(args.robots_override)
    return inst


def _weights(args, inst):
    if args.lambda_route is None and args.lambda_capacity is None:
        return None
    auto = PenaltyWeights.auto(inst)
    return PenaltyWeights(
        args.lambda_route if args.lambda_route is not None else auto.lambda_route,
        args.lambda_capacity if args.lambda_capacity is not None else auto.lambda_capacity,
    )


def run_solver(inst, solver: str, mode: str, seed: int, weights=None, **opts) -> Solution:
    model = assemble_qubo(inst, mode, weights)
    if solver == "exact":
        report = solve_exact(model, max_vars=opts.get("exact_max_vars", 24))
    elif solver == "anneal":
        cfg = AnnealConfig(seed=seed, **{k: opts[k] for k in ("sweeps", "restarts", "moves") if opts.get(k) is not None})
        report = solve_anneal(model, cfg)
    elif solver == "vqe":
        cfg = VqeConfig(seed=seed, **{k: opts[k] for k in ("layers", "max_iterations", "max_qubits") if opts.get(k) is not None})
        report = solve_vqe(to_ising(model), cfg)
    else:
        raise CliError(f"unknown solver {solver!r}")
    return decode(report.best, model.layout, inst, report.energy)


def summarize(sol: Solution, inst, out=None):
    out = out or sys.stdout
    for p, route in enumerate(sol.routes, start=1):
        if len(route) <= 2 and all(v == 0 for v in route):
            print(f"robot {p}: parked", file=out)
            continue
        path = " -> ".join(map(str, route))
        print(
            f"robot {p}: {path}  load {route_load(route, inst):g}/{inst.capacity}  "
            f"distance {route_distance(route, inst):.6g}",
            file=out,
        )
    print(f"total distance: {sol.total_distance:.6g}  robots used: {sol.robots_used}/{len(sol.routes)}", file=out)
    if sol.feasibility.ok:
        print("feasible: yes", file=out)
    else:
        print("feasible: no", file=out)
        for v in sol.feasibility.violations:
            print("  violation: " + ", ".join(f"{k}={val}" for k, val in v.to_dict().items()), file=out)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_solve(args) -> int:
    inst = _load(args)
    sol = run_solver(
        inst, args.solver, args.mode, args.seed, _weights(args, inst),
        exact_max_vars=args.exact_max_vars, sweeps=args.sweeps, restarts=args.restarts,
        moves=args.moves, layers=args.layers, max_iterations=args.max_iterations, max_qubits=args.max_qubits,
    )
    summarize(sol, inst)
    if args.output:
        _write(args.output, dump_solution(sol, args.solver, args.seed))
    return EXIT_OK if sol.feasibility.ok else EXIT_INFEASIBLE


def cmd_qubits(args) -> int:
    if args.sweep:
        try:
            lo, hi = (int(v) for v in args.sweep.split(".."))
        except ValueError:
            raise CliError(f"--sweep expects LO..HI, got {args.sweep!r}")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["items", "robots", "capacity", "mode", "qubits"])
        for n in range(lo, hi + 1):
            w.writerow([n, args.k, args.m, args.mode, qubit_count(n, args.k, args.m, args.mode)])
        sys.stdout.write(buf.getvalue())
    else:
        if args.n is None:
            raise CliError("qubits needs -n or --sweep")
        print(qubit_count(args.n, args.k, args.m, args.mode))
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = _load(args)
    try:
        res = oracle_optimum(inst)
    except InfeasibleInstance as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    loads = tuple(route_load(r, inst) for r in res.routes)
    sol = Solution(res.routes, loads, res.optimal_distance, None)
    sol = Solution(sol.routes, sol.loads, sol.total_distance, None, validate(sol, inst))
    summarize(sol, inst)
    print(f"assignments searched: {res.assignments_searched}")
    if args.output:
        _write(args.output, dump_solution(sol, "oracle", None))
    return EXIT_OK


def bench_rows(scenario: str, solver: str = "anneal", seed: int = 0, mode: str = "reduced", exact_max_vars: int = 24):
    if scenario in TABLE_ROWS:
        for n, M, row_mode in TABLE_ROWS[scenario]:
            yield {"items": n, "robots": 1, "mode": row_mode, "qubits": qubit_count(n, 1, M, row_mode),
                   "solver": "", "energy": "", "distance": "", "oracle_distance": "", "match": "", "wall_ms": ""}
        return
    if scenario not in SCENARIOS:
        raise CliError(f"unknown scenario {scenario!r}; choose from {sorted([*TABLE_ROWS, *SCENARIOS])}")
    name, fleet = SCENARIOS[scenario]
    base = resolve_instance(name)
    for K in fleet:
        inst = base.with_fleet(K)
        oracle = oracle_optimum(inst)
        qubits = qubit_count(inst.n, K, inst.capacity, mode)
        start = time.perf_counter()
        try:
            sol = run_solver(inst, solver, mode, seed, exact_max_vars=exact_max_vars)
        except SolverError:
            sol = None
        wall = round((time.perf_counter() - start) * 1000)
        if sol is None:
            yield {"items": inst.n, "robots": K, "mode": mode, "qubits": qubits, "solver": solver, "energy": "",
                   "distance": "", "oracle_distance": _fmt(oracle.optimal_distance), "match": "skipped", "wall_ms": wall}
            continue
        match = sol.feasibility.ok and abs(sol.total_distance - oracle.optimal_distance) <= 1e-9 * max(1.0, oracle.optimal_distance)
        yield {"items": inst.n, "robots": K, "mode": mode, "qubits": qubits, "solver": solver,
               "energy": _fmt(sol.energy), "distance": _fmt(sol.total_distance),
               "oracle_distance": _fmt(oracle.optimal_distance), "match": str(match).lower(), "wall_ms": wall}


def _fmt(v: float) -> str:
    return f"{v:.9g}"


def cmd_bench(args) -> int:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_HEADER, lineterminator="\n")
    w.writeheader()
    all_match = True
    for row in bench_rows(args.scenario, args.solver, args.seed, args.mode, args.exact_max_vars):
        w.writerow(row)
        all_match &= row["match"] in ("", "true", "skipped")
    _write(args.output, buf.getvalue())
    return EXIT_OK if all_match else EXIT_INFEASIBLE


def cmd_plot(args) -> int:
    inst = resolve_instance(args.instance)
    with open(args.solution, encoding="utf-8") as fh:
        sol, _ = load_solution(fh.read())
    if len(sol.routes) and max(max(r) for r in sol.routes) > inst.n:
        raise CliError("solution references nodes missing from the instance")
    _write(args.output, render_svg(sol, inst))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pickqubo", description="QUBO/Ising solver for robot order picking and batching")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance and write a solution document")
    p.add_argument("--instance", required=True, help="instance JSON path or bundled name (fig5, fig7)")
    p.add_argument("--solver", choices=("exact", "anneal", "vqe"), default="anneal")
    p.add_argument("--mode", choices=("full", "reduced"), default="reduced")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda-route", type=float)
    p.add_argument("--lambda-capacity", type=float)
    p.add_argument("--robots-override", type=int)
    p.add_argument("--output", "-o")
    p.add_argument("--sweeps", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--moves", choices=("mixed", "flip"))
    p.add_argument("--layers", type=int)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--max-qubits", type=int)
    p.add_argument("--exact-max-vars", type=int, default=28)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("qubits", help="qubit count of the encoding")
    p.add_argument("-n", type=int, help="number of items")
    p.add_argument("-k", type=int, default=1, help="number of robots")
    p.add_argument("-m", type=int, default=45, help="robot capacity")
    p.add_argument("--mode", choices=("full", "reduced"), default="reduced")
    p.add_argument("--sweep", help="item range LO..HI, printed as CSV")
    p.set_defaults(func=cmd_qubits)

    p = sub.add_parser("oracle", help="brute-force optimum (n <= 8, K <= 4)")
    p.add_argument("--instance", required=True)
    p.add_argument("--robots-override", type=int)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="qubit-count tables (tab1, tab2) or a bundled scenario scored against the oracle (fig5, fig7)")
    p.add_argument("scenario", choices=("tab1", "tab2", "fig5", "fig7"))
    p.add_argument("--solver", choices=("anneal", "exact", "vqe"), default="anneal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("full", "reduced"), default="reduced")
    p.add_argument("--exact-max-vars", type=int, default=28)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot", help="render a solution as SVG")
    p.add_argument("--solution", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, InstanceError, InstanceTooLarge, SolverError, PlotError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
