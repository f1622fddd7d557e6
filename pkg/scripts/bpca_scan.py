"""Bayesian PCA model scan on the simulated d = 8 data set, with an optional figure.

    python scripts/bpca_scan.py --draws 10000 --plot scan.png
"""

import argparse

import numpy as np

from ocnid import bpca


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=10_000)
    ap.add_argument("--eps", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--N", type=int, default=100)
    ap.add_argument("--preset", default="paper8", choices=sorted(bpca.PRESETS))
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--beta", type=float, default=3.0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--plot", help="write a four-panel figure here (needs matplotlib)")
    args = ap.parse_args()

    eig = bpca.covariance_eigs(bpca.simulate(bpca.PRESETS[args.preset], args.N, args.seed))
    print("sample eigenvalues:", np.round(eig.g, 4))
    rows = bpca.model_scan(eig, args.alpha, args.beta, args.eps, args.draws, args.seed, threads=args.threads)
    print(f"{'q':>2} {'bct':>7} {'loglik':>10} {'bic':>10} {'laplace':>10} {'laplace*':>10}")
    for r in rows:
        print(f"{r.q:>2} {r.mean_bct:7.2f} {r.max_loglik:10.3f} {r.bic:10.3f} {r.laplace:10.3f} {r.laplace_corrected:10.3f}")
    for col in ("bic", "laplace", "laplace_corrected"):
        print(f"argmax {col}: q={bpca.best_q(rows, col)}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        q = [r.q for r in rows]
        fig, axes = plt.subplots(1, 4, figsize=(14, 3.2))
        panels = [
            ("max log-likelihood", "max_loglik"),
            ("BIC evidence", "bic"),
            ("Laplace (literal exponent)", "laplace"),
            ("Laplace (corrected)", "laplace_corrected"),
        ]
        for ax, (title, col) in zip(axes, panels):
            ax.plot(q, [getattr(r, col) for r in rows], "o-")
            ax.set_title(title)
            ax.set_xlabel("q")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=120)
        print("wrote", args.plot)


if __name__ == "__main__":
    main()
