"""Command-line entry points: run experiments, self-test, toy regression demo."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .gp import GaussianProcess
from .harness import OPTIMIZER_NAMES, RunConfig, run_experiment
from .lgpga import AugmentedLocalGP
from .objectives import (
    TOY_INSIDE_RANGE,
    hetero_toy_sample,
    toy_mean,
    toy_noise_variance,
)
from .selftest import run_selftest

_RUN_FIELD_MAP = {
    "objective": "objective",
    "dim": "dim",
    "optimizer": "optimizer",
    "budget": "budget",
    "seeds": "n_seeds",
    "seed_base": "seed_base",
    "acq": "acquisition",
    "out": "out_dir",
    "threads": "threads",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boing",
        description="Forest-guided local Bayesian optimization bench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a seeded benchmark experiment")
    run_p.add_argument("--objective", choices=("branin", "ackley", "levy"))
    run_p.add_argument("--dim", type=int, help="dimension for scalable objectives")
    run_p.add_argument("--optimizer", choices=OPTIMIZER_NAMES)
    run_p.add_argument("--budget", type=int, help="evaluations per run")
    run_p.add_argument("--seeds", type=int, help="number of seeds (runs)")
    run_p.add_argument("--seed-base", type=int, help="first seed value")
    run_p.add_argument("--acq", choices=("ei", "logei"), help="acquisition kind")
    run_p.add_argument("--out", help="output directory")
    run_p.add_argument("--threads", type=int, help="worker processes (or BOING_THREADS)")
    run_p.add_argument("--config", help="JSON file holding any of the above settings")

    sub.add_parser("selftest", help="run the oracle-equivalence suites")

    toy_p = sub.add_parser(
        "toy-regression",
        help="heteroscedastic 1-D demo comparing the augmented local GP to a full GP",
    )
    toy_p.add_argument("--out", default="toy_results", help="output directory")
    toy_p.add_argument("--seed", type=int, default=0)
    toy_p.add_argument("--n", type=int, default=50, help="sample size (>= 46)")

    return parser


def _assemble_run_config(args: argparse.Namespace) -> RunConfig:
    settings: dict = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(_RUN_FIELD_MAP.values())
        if unknown:
            raise SystemExit(f"unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    for cli_name, field in _RUN_FIELD_MAP.items():
        value = getattr(args, cli_name)
        if value is not None:
            settings[field] = value
    missing = [k for k in ("objective", "optimizer", "budget") if k not in settings]
    if missing:
        raise SystemExit(f"missing required settings: {missing} (flags or --config)")
    return RunConfig(**settings)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _assemble_run_config(args)
    result = run_experiment(cfg)
    for summary in result["summaries"]:
        print(
            f"{summary['run_id']}: final incumbent {summary['final_incumbent']:.6g} "
            f"({summary['total_wall_s']:.1f}s)"
        )
    print(f"wrote {result['csv_path']} and {result['jsonl_path']}")
    return 0


def cmd_selftest() -> int:
    return 0 if run_selftest(verbose=True) else 1


def cmd_toy_regression(args: argparse.Namespace) -> int:
    lo, hi = TOY_INSIDE_RANGE
    if args.n < hi + 1:
        raise SystemExit(f"toy regression needs n >= {hi + 1}")
    x, y = hetero_toy_sample(n=args.n, seed=args.seed)
    X = x[:, None]
    inside = np.arange(lo, hi + 1)
    outside = np.setdiff1d(np.arange(args.n), inside)

    local = AugmentedLocalGP(random_state=args.seed).fit(
        X[inside], y[inside], X[outside], y[outside], center=X[inside].mean(axis=0)
    )
    full = GaussianProcess(random_state=args.seed).fit(X, y)

    grid = np.linspace(0.0, 1.0, 201)
    G = grid[:, None]
    local_mean, local_var = local.predict(G, return_var=True)
    full_mean, full_var = full.predict(G, return_var=True)
    truth = toy_mean(grid)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pred_path = out_dir / "toy_predictions.csv"
    with open(pred_path, "w") as fh:
        fh.write("x,true_mean,noise_variance,local_mean,local_var,full_mean,full_var\n")
        for i, g in enumerate(grid):
            fh.write(
                f"{g:.17g},{truth[i]:.17g},{toy_noise_variance(g):.17g},"
                f"{local_mean[i]:.17g},{local_var[i]:.17g},"
                f"{full_mean[i]:.17g},{full_var[i]:.17g}\n"
            )
    obs_path = out_dir / "toy_observations.csv"
    with open(obs_path, "w") as fh:
        fh.write("x,y,inside\n")
        for i in range(args.n):
            fh.write(f"{x[i]:.17g},{y[i]:.17g},{int(i in set(inside.tolist()))}\n")

    band = (grid >= x[inside].min()) & (grid <= x[inside].max())
    metrics = {
        "n": args.n,
        "seed": args.seed,
        "inside_indices": [int(lo), int(hi)],
        "rmse_local_inside_band": float(
            np.sqrt(np.mean((local_mean[band] - truth[band]) ** 2))
        ),
        "rmse_full_inside_band": float(
            np.sqrt(np.mean((full_mean[band] - truth[band]) ** 2))
        ),
        "rmse_local_global": float(np.sqrt(np.mean((local_mean - truth) ** 2))),
        "rmse_full_global": float(np.sqrt(np.mean((full_mean - truth) ** 2))),
        "n_inducing": int(local.inducing_.shape[0]),
    }
    metrics_path = out_dir / "toy_metrics.json"
    with open(metrics_path, "w") as fh:
        json.dump(metrics, fh, indent=2)
        fh.write("\n")
    print(f"wrote {pred_path}, {obs_path}, {metrics_path}")
    print(
        "inside-band RMSE: local "
        f"{metrics['rmse_local_inside_band']:.4f} vs full {metrics['rmse_full_inside_band']:.4f}"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "selftest":
        return cmd_selftest()
    if args.command == "toy-regression":
        return cmd_toy_regression(args)
    raise SystemExit(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
