"""Mean backward coupling times over a grid of m, theta and families.

    python scripts/coupling_time_grid.py --draws 10000 --max-m 8

Prints both the coupling index n and n + 1 (time steps counted from the notional start at -n-1).
Rows for m = 12 are slow; they are skipped unless --max-m 12 is given.
"""

import argparse
import time

from ocnid.cftp import draw_batch
from ocnid.distributions import Cauchy, Exponential, Pareto, Weibull

THETAS = {
    4: [(8, 6, 4, 1), (20, 5, 2, 1), (1.2, 0.8, 0.2, 0.05), (50, 30, 20, 10)],
    8: [
        (20, 14, 10, 8, 6, 5, 4, 2),
        (50, 12, 10, 6, 4, 2, 0.5, 0.1),
        (5, 2, 1.9, 1.2, 0.6, 0.4, 0.2, 0.1),
        (100, 70, 50, 30, 20, 10, 5, 1),
    ],
    12: [
        (20, 18, 14, 12, 10, 8, 7, 6, 5, 4, 2, 1),
        (70, 50, 14, 12, 10, 8, 7, 6, 5, 4, 0.2, 0.11),
        (4.5, 4, 3.5, 3.2, 2, 1.9, 1.2, 0.6, 0.4, 0.3, 0.2, 0.1),
        (100, 90, 80, 70, 50, 40, 30, 20, 10, 8, 5, 1),
    ],
}

FAMILIES = {
    "exponential": Exponential,
    "Weibull": lambda t: Weibull(3.0, t),
    "Cauchy": Cauchy,
    "Pareto": Pareto,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=10_000)
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--max-m", type=int, default=8, choices=sorted(THETAS))
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    print(f"{'m':>3}  {'theta':<44}" + "".join(f"{name:>16}" for name in FAMILIES))
    for m, rows in THETAS.items():
        if m > args.max_m:
            continue
        for theta in rows:
            cells = []
            for make in FAMILIES.values():
                b = draw_batch([make(t) for t in theta], args.eps, args.draws, args.seed, bct_only=True,
                               threads=args.threads)
                n = b.bct.mean()
                cells.append(f"{n:7.2f} ({n + 1:5.1f})")
            print(f"{m:>3}  {str(theta):<44}" + "".join(f"{c:>16}" for c in cells), flush=True)


if __name__ == "__main__":
    t0 = time.perf_counter()
    main()
    print(f"done in {time.perf_counter() - t0:.0f}s")
