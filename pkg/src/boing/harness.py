"""Experiment harness: seeded runs, CSV trajectories, JSONL summaries.

Every run row carries the full loop state so trajectories can be compared
across optimizers; all fields except the per-iteration wall time are
deterministic for a fixed seed (wall time is the one physically
non-reproducible column).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path

from .baselines import GPOptimizer, RandomSearch, RFOptimizer
from .boing import ACQUISITIONS, BoingConfig, BoingOptimizer
from .boing_plus import BoingPlusOptimizer
from .loop import AskTellOptimizer, Trajectory
from .objectives import ObjectiveSpec, get_objective
from .space import SearchSpace
from .turbo import TurboOptimizer
from .validation import check_positive_int

OPTIMIZER_NAMES = ("boing", "boing_plus", "gp", "rf", "turbo", "random")

CSV_FIXED_COLUMNS = (
    "run_id",
    "optimizer",
    "objective",
    "seed",
    "t",
)
CSV_TAIL_COLUMNS = (
    "y",
    "incumbent",
    "phase",
    "subregion_volume_fraction",
    "inside_count",
    "iter_wall_ms",
)


@dataclass
class RunConfig:
    """One experiment: an objective, an optimizer, a budget, and K seeds."""

    objective: str
    optimizer: str
    budget: int
    dim: int | None = None
    n_seeds: int = 1
    seed_base: int = 0
    acquisition: str = "ei"
    out_dir: str = "results"
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.optimizer not in OPTIMIZER_NAMES:
            raise ValueError(f"optimizer must be one of {OPTIMIZER_NAMES}")
        if self.acquisition not in ACQUISITIONS:
            raise ValueError(f"acquisition must be one of {ACQUISITIONS}")
        check_positive_int(self.budget, "budget")
        check_positive_int(self.n_seeds, "n_seeds")

    @property
    def seeds(self) -> list[int]:
        return list(range(self.seed_base, self.seed_base + self.n_seeds))


def make_optimizer(
    name: str,
    space: SearchSpace,
    seed: int,
    acquisition: str = "ei",
    budget: int | None = None,
) -> AskTellOptimizer:
    if name in ("boing", "boing_plus"):
        config = BoingConfig(
            budget=budget,
            global_acquisition=acquisition,
            local_acquisition=acquisition,
        )
        cls = BoingOptimizer if name == "boing" else BoingPlusOptimizer
        return cls(space, config, seed=seed)
    if name == "gp":
        return GPOptimizer(space, seed=seed, acquisition=acquisition)
    if name == "rf":
        return RFOptimizer(space, seed=seed, acquisition=acquisition)
    if name == "turbo":
        return TurboOptimizer(space, seed=seed)
    if name == "random":
        return RandomSearch(space, seed=seed)
    raise ValueError(f"unknown optimizer {name!r}")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def csv_header(dim: int) -> str:
    coords = tuple(f"x_{i + 1}" for i in range(dim))
    return ",".join(CSV_FIXED_COLUMNS + coords + CSV_TAIL_COLUMNS)


def trajectory_rows(
    run_id: str, cfg: RunConfig, spec: ObjectiveSpec, seed: int, trajectory: Trajectory
) -> list[str]:
    rows = []
    for rec in trajectory:
        fields = [run_id, cfg.optimizer, spec.name, str(seed), str(rec.t)]
        fields.extend(format_float(v) for v in rec.point)
        fields.extend(
            [
                format_float(rec.cost),
                format_float(rec.incumbent),
                rec.phase,
                format_float(rec.subregion_volume_fraction),
                str(rec.inside_count),
                format_float(rec.wall_ms),
            ]
        )
        rows.append(",".join(fields))
    return rows


def run_seed(cfg: RunConfig, seed: int) -> tuple[list[str], dict]:
    """Execute one seeded run; returns CSV rows and the JSONL summary."""
    spec = get_objective(cfg.objective, cfg.dim)
    spec.verify_optima()  # refuse to benchmark a miscoded objective
    optimizer = make_optimizer(cfg.optimizer, spec.space(), seed, cfg.acquisition, cfg.budget)
    t0 = time.perf_counter()
    trajectory = optimizer.run(spec, cfg.budget)
    total_wall_s = time.perf_counter() - t0
    run_id = f"{cfg.optimizer}-{spec.name}{spec.dim}d-s{seed}"
    rows = trajectory_rows(run_id, cfg, spec, seed, trajectory)
    best = optimizer.dataset.best()
    summary = {
        "run_id": run_id,
        "optimizer": cfg.optimizer,
        "objective": spec.name,
        "dim": spec.dim,
        "seed": seed,
        "budget": cfg.budget,
        "acquisition": cfg.acquisition,
        "final_incumbent": best.cost,
        "best_point": [float(v) for v in best.point],
        "total_wall_s": total_wall_s,
        "phase_eval_counts": trajectory.phase_counts(),
    }
    return rows, summary


def resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("BOING_THREADS", "")
    return max(1, int(env)) if env.strip() else 1


def run_experiment(cfg: RunConfig) -> dict:
    """Run all seeds of `cfg`, writing results.csv and summary.jsonl.

    Seeds fan out over worker processes when more than one thread is
    configured (BOING_THREADS or cfg.threads); outputs are written in seed
    order either way so file contents do not depend on scheduling.
    """
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = get_objective(cfg.objective, cfg.dim)

    n_workers = resolve_threads(cfg.threads)
    if n_workers > 1 and cfg.n_seeds > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(_run_seed_star, [(cfg, s) for s in cfg.seeds]))
    else:
        outcomes = [run_seed(cfg, s) for s in cfg.seeds]

    csv_path = out_dir / "results.csv"
    jsonl_path = out_dir / "summary.jsonl"
    with open(csv_path, "w") as fh:
        fh.write(csv_header(spec.dim) + "\n")
        for rows, _ in outcomes:
            for row in rows:
                fh.write(row + "\n")
    with open(jsonl_path, "w") as fh:
        for _, summary in outcomes:
            fh.write(json.dumps(summary) + "\n")
    return {
        "csv_path": str(csv_path),
        "jsonl_path": str(jsonl_path),
        "summaries": [s for _, s in outcomes],
        "config": asdict(cfg),
    }


def _run_seed_star(args: tuple[RunConfig, int]) -> tuple[list[str], dict]:
    return run_seed(*args)
