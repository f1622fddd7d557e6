"""Command-line front end.

    ocnid sample --dist exp:8 --dist exp:6 --dist exp:4 --dist exp:2 --eps 1e-4 --n 100000 --seed 1
    ocnid oracle --dist exp:8 --dist exp:6 --n 100000 --seed 1
    ocnid bpca --simulate paper8 --alpha 2 --beta 3 --n 10000 --eps 1e-4 --seed 1

Exit codes: 0 success, 2 configuration error, 3 data error, 4 non-coalescence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import bpca
from .cftp import DEFAULT_MAX_N, draw_batch
from .distributions import Distribution, parse_distribution, validate_family
from .errors import ConfigError, DataError, DomainError, NonCoalescenceError
from .oracle import rejection_batch
from .stats import histogram

log = logging.getLogger("ocnid")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NONCOAL = 0, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    dists: list[Distribution] = field(default_factory=list)
    eps: float = 1e-4
    n: int = 1000
    seed: int = 1
    out: Path = Path("out")
    bins: int = 50
    threads: int = 1
    max_n: int = DEFAULT_MAX_N
    bct_only: bool = False
    doubling: bool = False

    @property
    def m(self) -> int:
        return len(self.dists)

    def validate(self) -> None:
        if not self.eps > 0:
            raise ConfigError("--eps must be positive")
        if self.n < 1:
            raise ConfigError("--n must be >= 1")
        if self.bins < 1:
            raise ConfigError("--bins must be >= 1")
        if self.command in ("sample", "oracle"):
            validate_family(self.dists)


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_draws(path: Path, values: Optional[np.ndarray], bct=None, gap=None, m: int = 0) -> None:
    cols = [f"x_{i + 1}" for i in range(m)]
    if bct is not None:
        cols += ["bct", "gap"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        count = len(bct) if bct is not None else values.shape[0]
        for j in range(count):
            row = [] if values is None else [_fmt(v) for v in values[j]]
            if bct is not None:
                row += [str(int(bct[j])), _fmt(gap[j])]
            w.writerow(row)


def _hist_range(col: np.ndarray) -> tuple[float, float]:
    # central 99% so heavy tails do not flatten the bins; the rest is overflow
    lo, hi = np.quantile(col, [0.005, 0.995])
    if not hi > lo:
        lo, hi = lo - 0.5, hi + 0.5
    return float(lo), float(hi)


def write_histograms(path: Path, values: np.ndarray, bins: int) -> list[dict]:
    flows = []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["component", "bin_left", "bin_right", "count", "density"])
        for i in range(values.shape[1]):
            h = histogram(values[:, i], bins, _hist_range(values[:, i]))
            for left, right, c, dens in zip(h.edges[:-1], h.edges[1:], h.counts, h.density):
                w.writerow([i + 1, _fmt(left), _fmt(right), int(c), _fmt(dens)])
            flows.append({"component": i + 1, "underflow": h.underflow, "overflow": h.overflow})
    return flows


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_sample(cfg: RunConfig) -> int:
    batch = draw_batch(
        cfg.dists,
        cfg.eps,
        cfg.n,
        cfg.seed,
        max_n=cfg.max_n,
        doubling=cfg.doubling,
        threads=cfg.threads,
        bct_only=cfg.bct_only,
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    summary = batch.summary()
    summary["distributions"] = [d.spec for d in cfg.dists]
    summary["schedule"] = "doubling" if cfg.doubling else "increment"
    write_draws(cfg.out / "draws.csv", batch.values, batch.bct, batch.gap, m=0 if cfg.bct_only else cfg.m)
    if not cfg.bct_only:
        summary["histogram_overflow"] = write_histograms(cfg.out / "histogram.csv", batch.values, cfg.bins)
    write_json(cfg.out / "summary.json", summary)
    print(
        f"{cfg.n} draws, mean BCT {summary['mean_bct']:.3f} "
        f"(min {summary['min_bct']}, max {summary['max_bct']}) -> {cfg.out}"
    )
    return EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    res = rejection_batch(cfg.dists, cfg.n, cfg.seed)
    cfg.out.mkdir(parents=True, exist_ok=True)
    write_draws(cfg.out / "draws.csv", res.draws, m=cfg.m)
    summary = {
        "n_draws": cfg.n,
        "seed": cfg.seed,
        "proposals_used": res.proposals_used,
        "acceptance_rate": res.acceptance_rate,
        "distributions": [d.spec for d in cfg.dists],
        "histogram_overflow": write_histograms(cfg.out / "histogram.csv", res.draws, cfg.bins),
    }
    write_json(cfg.out / "summary.json", summary)
    print(f"{cfg.n} oracle draws, acceptance rate {res.acceptance_rate:.4f} -> {cfg.out}")
    return EXIT_OK


def read_matrix(path: Path) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for r, line in enumerate(csv.reader(fh), start=1):
            if not line or all(not c.strip() for c in line):
                continue
            try:
                rows.append([float(c) for c in line])
            except ValueError:
                if r == 1 and not rows:
                    continue  # header
                bad = next(i for i, c in enumerate(line, start=1) if not _is_float(c))
                raise DataError(f"{path}: row {r}, column {bad}: not a number ({line[bad - 1]!r})") from None
            if len(rows[-1]) != len(rows[0]):
                raise DataError(f"{path}: row {r} has {len(rows[-1])} columns, expected {len(rows[0])}")
    if not rows:
        raise DataError(f"{path}: no data rows")
    return np.array(rows)


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def cmd_bpca(cfg: RunConfig, args) -> int:
    if args.simulate:
        if args.simulate not in bpca.PRESETS:
            raise ConfigError(f"unknown --simulate preset {args.simulate!r}; choose from {sorted(bpca.PRESETS)}")
        data = bpca.simulate(bpca.PRESETS[args.simulate], args.N, cfg.seed)
    elif args.data:
        try:
            data = read_matrix(Path(args.data))
        except OSError as exc:
            raise DataError(str(exc)) from None
    else:
        raise ConfigError("bpca needs --data FILE or --simulate PRESET")
    eig = bpca.covariance_eigs(data)
    rows = bpca.model_scan(
        eig,
        alpha=args.alpha,
        beta=args.beta,
        eps=cfg.eps,
        draws_per_q=cfg.n,
        seed=cfg.seed,
        max_n=cfg.max_n,
        threads=cfg.threads,
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    fields = ["q", "mean_bct", "max_bct", "max_loglik", "bic", "laplace", "laplace_corrected", "sigma2"]
    with open(cfg.out / "scores.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(fields)
        for row in rows:
            d = row.as_dict()
            w.writerow([d[f] if f in ("q", "max_bct") else _fmt(d[f]) for f in fields])
    chosen = {c: bpca.best_q(rows, c) for c in ("max_loglik", "bic", "laplace", "laplace_corrected")}
    write_json(
        cfg.out / "scores.json",
        {
            "eigenvalues": [float(v) for v in eig.g],
            "N": eig.N,
            "alpha": args.alpha,
            "beta": args.beta,
            "epsilon": cfg.eps,
            "draws_per_q": cfg.n,
            "seed": cfg.seed,
            "rows": [r.as_dict() for r in rows],
            "chosen_q": {k: v for k, v in chosen.items() if k != "max_loglik"},
        },
    )
    for row in rows:
        print(
            f"q={row.q}  bct={row.mean_bct:6.2f}  loglik={row.max_loglik:10.3f}  "
            f"bic={row.bic:10.3f}  laplace={row.laplace:10.3f}  laplace*={row.laplace_corrected:10.3f}"
        )
    print(f"chosen q: bic={chosen['bic']} laplace={chosen['laplace']} laplace_corrected={chosen['laplace_corrected']}")
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _dist_arg(text: str) -> Distribution:
    try:
        return parse_distribution(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1000, help="number of draws (per q for bpca)")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    sampler = argparse.ArgumentParser(add_help=False)
    sampler.add_argument("--eps", type=float, default=1e-4)
    sampler.add_argument("--max-n", type=int, default=DEFAULT_MAX_N, help="coalescence guard")

    dists = argparse.ArgumentParser(add_help=False)
    dists.add_argument(
        "--dist",
        type=_dist_arg,
        action="append",
        required=True,
        help="marginal for the next component: exp:R weibull:K:R cauchy:R fcauchy:R pareto:S invgamma:A:B",
    )
    dists.add_argument("--bins", type=int, default=50)

    p = argparse.ArgumentParser(prog="ocnid", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", parents=[common, sampler, dists], help="epsilon-perfect CFTP draws")
    s.add_argument("--bct-only", action="store_true", help="store only coupling times")
    s.add_argument("--doubling", action="store_true", help="double n on each retry instead of n+1")

    sub.add_parser("oracle", parents=[common, dists], help="rejection-sampler reference draws")

    b = sub.add_parser("bpca", parents=[common, sampler], help="Bayesian PCA model scan over q")
    b.add_argument("--data", help="CSV matrix, N rows by d columns")
    b.add_argument("--simulate", help=f"built-in data set: {', '.join(sorted(bpca.PRESETS))}")
    b.add_argument("--N", type=int, default=100, help="rows to simulate")
    b.add_argument("--alpha", type=float, default=2.0)
    b.add_argument("--beta", type=float, default=3.0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = RunConfig(
        command=args.command,
        dists=getattr(args, "dist", None) or [],
        eps=getattr(args, "eps", 1e-4),
        n=args.n,
        seed=args.seed,
        out=args.out,
        bins=getattr(args, "bins", 50),
        threads=args.threads,
        max_n=getattr(args, "max_n", DEFAULT_MAX_N),
        bct_only=getattr(args, "bct_only", False),
        doubling=getattr(args, "doubling", False),
    )
    try:
        cfg.validate()
        if cfg.command == "sample":
            return cmd_sample(cfg)
        if cfg.command == "oracle":
            return cmd_oracle(cfg)
        return cmd_bpca(cfg, args)
    except (ConfigError, DomainError) as exc:
        print(f"ocnid: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"ocnid: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NonCoalescenceError as exc:
        print(f"ocnid: {exc}", file=sys.stderr)
        return EXIT_NONCOAL
    except OSError as exc:
        print(f"ocnid: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
