"""Single-flip vs mixed-move annealing: success rate against the exact optimum.

    python3 scripts/compare_moves.py --seeds 20
"""

import argparse

from pickqubo import AnnealConfig, assemble_qubo, decode, oracle_optimum, resolve_instance, solve_anneal


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="fig5")
    ap.add_argument("--robots", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()

    base = resolve_instance(args.scenario)
    print(f"{'K':>2} {'moves':>6} {'optimal':>8} {'feasible':>9}")
    for K in args.robots:
        inst = base.with_fleet(K)
        best = oracle_optimum(inst).optimal_distance
        model = assemble_qubo(inst)
        for moves in ("flip", "mixed"):
            hits = feas = 0
            for seed in range(args.seeds):
                rep = solve_anneal(model, AnnealConfig(seed=seed, moves=moves))
                sol = decode(rep.best, model.layout, inst)
                feas += sol.feasibility.ok
                hits += sol.feasibility.ok and abs(sol.total_distance - best) <= 1e-9
            print(f"{K:>2} {moves:>6} {hits:>5}/{args.seeds} {feas:>6}/{args.seeds}")


if __name__ == "__main__":
    main()
