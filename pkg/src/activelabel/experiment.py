"""Seeded experiment harness: budget sweeps, ablations, and tabular reports.

Each (method, budget, trial) cell runs a full labeling session; within a
trial every cell shares the same seed, so all methods see the same split,
the same init, and the same warmup, and comparisons are paired. A full-label
reference model is trained once per trial; budget models are scored by
holdout accuracy and by output divergence from that reference.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import core, evaluation, loop, model, strategy

# method -> (selection rule, loss weighting on?)
METHODS = {
    "active": ("least_confidence", True),
    "ce": ("least_confidence", False),
    "random": ("random", False),
    "entropy": ("entropy", False),
    "margin": ("margin", False),
}

REPORT_HEADER = ("method", "budget", "trial", "seed", "accuracy", "divergence", "runtime_s", "status")
SUMMARY_HEADER = (
    "method",
    "budget",
    "trials",
    "mean_accuracy",
    "var_accuracy",
    "mean_divergence",
    "var_divergence",
)
PLOTDATA_HEADER = ("method", "budget", "mean_accuracy", "std_accuracy")

_SEED_REF_INIT = 21
_SEED_REF_TRAIN = 22


@dataclass(frozen=True)
class ExperimentGrid:
    """The sweep: which methods to run, at which budgets, over how many trials."""

    methods: tuple[str, ...] = ("active", "random")
    budgets: tuple[int, ...] = (50, 100, 150, 200, 250, 300)
    rounds: int = 5
    trials: int = 5
    base_seed: int = 0
    epochs_per_round: int = 20
    batch_size: int = 42
    lr_start: float = 1e-3
    lr_end: float = 1e-5
    alpha: float = 1.0
    norm_mode: str = "softmax_norm"
    architecture: str = "softmax_linear"
    hidden_units: int = 32
    warmup_epochs: int = 1
    holdout_fraction: float = 0.2
    reference_epochs: int | None = None  # default: epochs_per_round * rounds

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class ReportRow:
    method: str
    budget: int
    trial: int
    seed: int
    accuracy: float
    divergence: float
    runtime_s: float
    status: str = "ok"


def session_config(grid: ExperimentGrid, dataset_name: str, method: str, budget: int, seed: int):
    selection, weighted = METHODS[method]
    schedule = model.TrainSchedule(
        epochs=grid.epochs_per_round,
        batch_size=grid.batch_size,
        lr_start=grid.lr_start,
        lr_end=grid.lr_end,
        weighting_enabled=weighted,
        alpha=grid.alpha,
    )
    return loop.SessionConfig(
        dataset=dataset_name,
        budget=budget,
        rounds=grid.rounds,
        schedule=schedule,
        weighting=strategy.WeightingConfig(alpha=grid.alpha, norm_mode=grid.norm_mode),
        architecture=grid.architecture,
        hidden_units=grid.hidden_units,
        warmup_epochs=grid.warmup_epochs,
        holdout_fraction=grid.holdout_fraction,
        selection=selection,
        seed=seed,
    )


def train_reference(grid: ExperimentGrid, pool: core.Dataset, seed: int):
    """The full-label model: plain CE on every pool label."""
    epochs = grid.reference_epochs or grid.epochs_per_round * grid.rounds
    schedule = model.TrainSchedule(
        epochs=epochs,
        batch_size=grid.batch_size,
        lr_start=grid.lr_start,
        lr_end=grid.lr_end,
        weighting_enabled=False,
    )
    params = model.init_params(
        grid.architecture,
        pool.dim,
        pool.num_classes,
        hidden_units=grid.hidden_units,
        seed=np.random.SeedSequence([seed, _SEED_REF_INIT]),
    )
    pairs = [(s.features, s.true_label) for s in pool.samples]
    params, _ = model.train(
        params, pairs, schedule, np.random.SeedSequence([seed, _SEED_REF_TRAIN])
    )
    return params


def run_experiment(grid: ExperimentGrid, dataset: core.Dataset, out_dir=None) -> list[ReportRow]:
    """Run every grid cell and (optionally) write the delimited report files.

    Rows come back sorted by (method, budget, trial) and are deterministic
    given the grid and dataset, apart from runtime_s. If a cell fails, the
    rows collected so far plus a failure marker row are flushed before the
    error propagates.
    """
    if max(grid.budgets) > len(dataset):
        raise ValueError("budget exceeds pool")
    rows: list[ReportRow] = []
    for trial in range(grid.trials):
        seed = grid.base_seed + trial
        probe = session_config(grid, dataset.name, grid.methods[0], grid.budgets[0], seed)
        pool, holdout = loop.split_for_session(dataset, probe)
        reference = train_reference(grid, pool, seed)
        for method in grid.methods:
            for budget in grid.budgets:
                t0 = time.perf_counter()
                try:
                    config = session_config(grid, dataset.name, method, budget, seed)
                    params, _, _ = loop.run_session(config, dataset)
                    rows.append(
                        ReportRow(
                            method=method,
                            budget=budget,
                            trial=trial,
                            seed=seed,
                            accuracy=evaluation.accuracy(params, holdout),
                            divergence=evaluation.representativeness_divergence(
                                reference, params, holdout
                            ),
                            runtime_s=time.perf_counter() - t0,
                        )
                    )
                except Exception:
                    rows.append(
                        ReportRow(
                            method=method,
                            budget=budget,
                            trial=trial,
                            seed=seed,
                            accuracy=math.nan,
                            divergence=math.nan,
                            runtime_s=time.perf_counter() - t0,
                            status="failed",
                        )
                    )
                    rows.sort(key=lambda r: (r.method, r.budget, r.trial))
                    if out_dir is not None:
                        write_report_files(rows, out_dir)
                    raise
    rows.sort(key=lambda r: (r.method, r.budget, r.trial))
    if out_dir is not None:
        write_report_files(rows, out_dir)
    return rows


def summarize(rows) -> list[dict]:
    """Per-(method, budget) mean and sample variance over the ok trials."""
    groups: dict[tuple[str, int], list[ReportRow]] = {}
    for row in rows:
        if row.status == "ok":
            groups.setdefault((row.method, row.budget), []).append(row)
    out = []
    for (method, budget) in sorted(groups):
        acc = np.array([r.accuracy for r in groups[(method, budget)]])
        div = np.array([r.divergence for r in groups[(method, budget)]])
        ddof = 1 if acc.size > 1 else 0
        out.append(
            {
                "method": method,
                "budget": budget,
                "trials": int(acc.size),
                "mean_accuracy": float(acc.mean()),
                "var_accuracy": float(acc.var(ddof=ddof)),
                "mean_divergence": float(div.mean()),
                "var_divergence": float(div.var(ddof=ddof)),
            }
        )
    return out


def write_report_files(rows, out_dir) -> dict[str, Path]:
    """report.csv (per trial), summary.csv (per curve point), plotdata.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out / "report.csv",
        "summary": out / "summary.csv",
        "plotdata": out / "plotdata.csv",
    }
    with open(paths["report"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.method,
                    r.budget,
                    r.trial,
                    r.seed,
                    "" if math.isnan(r.accuracy) else repr(r.accuracy),
                    "" if math.isnan(r.divergence) else repr(r.divergence),
                    f"{r.runtime_s:.3f}",
                    r.status,
                ]
            )
    summary = summarize(rows)
    with open(paths["summary"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_HEADER)
        for s in summary:
            writer.writerow(
                [
                    s["method"],
                    s["budget"],
                    s["trials"],
                    repr(s["mean_accuracy"]),
                    repr(s["var_accuracy"]),
                    repr(s["mean_divergence"]),
                    repr(s["var_divergence"]),
                ]
            )
    with open(paths["plotdata"], "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PLOTDATA_HEADER)
        for s in summary:
            writer.writerow(
                [
                    s["method"],
                    s["budget"],
                    repr(s["mean_accuracy"]),
                    repr(math.sqrt(s["var_accuracy"])),
                ]
            )
    return paths
