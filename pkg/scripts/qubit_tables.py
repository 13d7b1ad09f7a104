"""Print the qubit-count columns for the full and reduced encodings.

    python3 scripts/qubit_tables.py [--items 2..12] [--robots 1]
"""

import argparse

from pickqubo import qubit_count


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--items", default="2..12")
    ap.add_argument("--robots", type=int, default=1)
    args = ap.parse_args()
    lo, hi = (int(v) for v in args.items.split(".."))

    print(f"{'items':>5} {'full M=45':>10} {'reduced':>8} {'M':>3}")
    for n in range(lo, hi + 1):
        # reduced column uses capacity 15 up to 9 items, 25 after
        M = 15 if n <= 9 else 25
        print(f"{n:>5} {qubit_count(n, args.robots, 45, 'full'):>10} {qubit_count(n, args.robots, M, 'reduced'):>8} {M:>3}")


if __name__ == "__main__":
    main()
