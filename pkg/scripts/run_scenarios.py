"""Seeded annealing runs on the bundled scenarios, scored against the brute-force oracle.

Writes one CSV row per (scenario, robots, seed) and prints a per-K summary.

    python3 scripts/run_scenarios.py --scenario fig5 --seeds 20 --output runs.csv
"""

import argparse
import csv
import sys
import time
from dataclasses import asdict, dataclass

from pickqubo import AnnealConfig, assemble_qubo, decode, oracle_optimum, resolve_instance, solve_anneal

FLEETS = {"fig5": (1, 2, 3), "fig7": (1, 2, 3, 4)}


@dataclass
class Run:
    scenario: str
    robots: int
    seed: int
    qubits: int
    distance: float
    oracle_distance: float
    feasible: bool
    match: bool
    robots_used: int
    wall_s: float


def run_scenario(name: str, seeds: int, sweeps: int, restarts: int, moves: str):
    base = resolve_instance(name)
    for K in FLEETS[name]:
        inst = base.with_fleet(K)
        best = oracle_optimum(inst).optimal_distance
        model = assemble_qubo(inst)
        for seed in range(seeds):
            t0 = time.perf_counter()
            rep = solve_anneal(model, AnnealConfig(sweeps=sweeps, restarts=restarts, seed=seed, moves=moves))
            wall = time.perf_counter() - t0
            sol = decode(rep.best, model.layout, inst, rep.energy)
            ok = sol.feasibility.ok
            yield Run(name, K, seed, model.num_vars, round(sol.total_distance, 9), round(best, 9), ok,
                      ok and abs(sol.total_distance - best) <= 1e-9, sol.robots_used, round(wall, 3))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", choices=sorted(FLEETS), nargs="+", default=["fig5", "fig7"])
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--sweeps", type=int, default=AnnealConfig.sweeps)
    ap.add_argument("--restarts", type=int, default=AnnealConfig.restarts)
    ap.add_argument("--moves", choices=("mixed", "flip"), default="mixed")
    ap.add_argument("--output", "-o")
    args = ap.parse_args()

    runs = [r for name in args.scenario for r in run_scenario(name, args.seeds, args.sweeps, args.restarts, args.moves)]
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(asdict(runs[0])))
    w.writeheader()
    w.writerows(asdict(r) for r in runs)
    if args.output:
        fh.close()

    print(file=sys.stderr)
    for name in args.scenario:
        for K in FLEETS[name]:
            sel = [r for r in runs if r.scenario == name and r.robots == K]
            hits = sum(r.match for r in sel)
            slowest = max(r.wall_s for r in sel)
            print(f"{name} K={K}: {hits}/{len(sel)} optimal, slowest run {slowest:.2f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
