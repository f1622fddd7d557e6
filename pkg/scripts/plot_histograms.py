"""Marginal histograms of perfect draws against rejection-oracle draws.

    python scripts/plot_histograms.py --family weibull --draws 100000 --out weibull.png
"""

import argparse

import numpy as np

from ocnid.cftp import draw_batch
from ocnid.distributions import Cauchy, Exponential, FoldedCauchy, Pareto, Weibull
from ocnid.oracle import rejection_batch, two_sample_distance

FAMILIES = {
    "exponential": [Exponential(t) for t in (8, 6, 4, 2)],
    "weibull": [Weibull(3, t) for t in (8, 6, 4, 2)],
    "cauchy": [Cauchy(t) for t in (8, 6, 4, 2)],
    "pareto": [Pareto(t) for t in (8, 6, 4, 2)],
    "mixed": [Exponential(2), Weibull(3, 2), FoldedCauchy(2)],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", default="exponential", choices=sorted(FAMILIES))
    ap.add_argument("--draws", type=int, default=100_000)
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--bins", type=int, default=60)
    ap.add_argument("--out", default="histograms.png")
    args = ap.parse_args()

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    dists = FAMILIES[args.family]
    perfect = draw_batch(dists, args.eps, args.draws, args.seed)
    oracle = rejection_batch(dists, args.draws, args.seed + 1).draws
    print(f"mean BCT {perfect.bct.mean():.2f} (min {perfect.bct.min()}, max {perfect.bct.max()})")

    fig, axes = plt.subplots(1, len(dists), figsize=(3.2 * len(dists), 3))
    for i, ax in enumerate(axes):
        x, y = perfect.values[:, i], oracle[:, i]
        lo, hi = np.quantile(np.concatenate([x, y]), [0.005, 0.995])
        ax.hist(x, bins=args.bins, range=(lo, hi), density=True, alpha=0.6, label="CFTP")
        ax.hist(y, bins=args.bins, range=(lo, hi), density=True, histtype="step", color="k", label="rejection")
        ks = two_sample_distance(x, y)
        ax.set_title(f"$X_{i + 1}$  KS p={ks.pvalue:.2g}")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print("wrote", args.out)


if __name__ == "__main__":
    main()
