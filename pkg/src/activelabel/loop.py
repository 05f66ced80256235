"""Session orchestration: warmup, per-round selection, label intake, fine-tuning.

A session starts with no labels at all. Round 0 assigns uniform random
pseudo-labels to the whole pool and trains briefly on them so the first
uncertainty scores are model-derived; those pseudo-labels are then discarded
from all later training. Each subsequent round queries the oracle for the
planned quota of most-uncertain samples and fine-tunes the current model on
every label purchased so far.

Every random draw derives from (config.seed, purpose, round), so a session is
a pure function of its config and the oracle's answers, and can be resumed
from a persisted state file bit-exactly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import core, evaluation, model, strategy

STATUS_AWAITING = "awaiting_labels"
STATUS_TRAINING = "training"
STATUS_COMPLETE = "complete"
STATUSES = (STATUS_AWAITING, STATUS_TRAINING, STATUS_COMPLETE)

SELECTION_KINDS = ("least_confidence", "random", "entropy", "margin")

STATE_VERSION = 1

# purpose tags for derived seeds
_SEED_SPLIT = 11
_SEED_INIT = 12
_SEED_WARMUP_LABELS = 13
_SEED_WARMUP_TRAIN = 14
_SEED_TRAIN = 15
_SEED_SELECT = 16


class SessionError(ValueError):
    """A session operation violated its contract; no state was changed."""


class BudgetExceedsPoolError(SessionError):
    """The requested budget is larger than the pool."""


def _derived_seed(seed: int, purpose: int, round_index: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), purpose, round_index])


class Oracle:
    """Label source contract: answers are stable per sample id."""

    def label_of(self, sample_id: int) -> int:
        raise NotImplementedError


class SimulatedOracle(Oracle):
    """Answers synchronously from the dataset's hidden ground truth."""

    def __init__(self, dataset: core.Dataset):
        self._labels = {s.id: s.true_label for s in dataset.samples}

    def label_of(self, sample_id: int) -> int:
        return self._labels[sample_id]


@dataclass(frozen=True)
class SessionConfig:
    """Everything a session needs; all randomness derives from ``seed``.

    ``budget`` is the total number of oracle queries (n), split over
    ``rounds`` (r) query rounds.
    """

    dataset: str
    budget: int
    rounds: int
    schedule: model.TrainSchedule
    weighting: strategy.WeightingConfig = strategy.WeightingConfig()
    architecture: str = "softmax_linear"
    hidden_units: int = 32
    warmup_epochs: int = 1
    holdout_fraction: float = 0.2
    selection: str = "least_confidence"
    retrain_from_scratch: bool = False
    reset_optimizer_each_round: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 1 or self.budget < self.rounds:
            raise SessionError("invalid budget")
        if self.warmup_epochs < 0:
            raise SessionError("warmup_epochs must be >= 0")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise SessionError("holdout_fraction must be in (0, 1)")
        if self.selection not in SELECTION_KINDS:
            raise SessionError(f"unknown selection {self.selection!r}")
        if self.architecture not in model.ARCHITECTURES:
            raise SessionError(f"unknown architecture {self.architecture!r}")


@dataclass(frozen=True)
class RoundMetrics:
    """Post-training snapshot for one round (round 0 covers the warmup)."""

    round: int
    labeled_total: int
    holdout_accuracy: float
    mean_pool_uncertainty: float


@dataclass(frozen=True)
class SessionState:
    """Full persisted state of one active-labeling session."""

    session_id: str
    config: SessionConfig
    plan: core.RoundPlan
    params: model.ClassifierParams
    opt: model.OptimizerState
    labels: tuple[core.LabelRecord, ...]
    current_round: int
    pending_query: tuple[int, ...]
    history: tuple[RoundMetrics, ...]
    status: str
    initial_metrics: RoundMetrics

    def oracle_records(self) -> list[core.LabelRecord]:
        return [rec for rec in self.labels if rec.source != "random_warmup"]

    def labeled_ids(self) -> set[int]:
        return {rec.sample_id for rec in self.oracle_records()}


def split_for_session(dataset: core.Dataset, config: SessionConfig):
    """The session's deterministic pool/holdout partition."""
    return core.split_holdout(
        dataset, config.holdout_fraction, _derived_seed(config.seed, _SEED_SPLIT)
    )


def warmup_random_labels(pool: core.Dataset, seed) -> list[core.LabelRecord]:
    """Uniform pseudo-labels for every pool sample (source random_warmup, round 0)."""
    if len(pool) == 0:
        raise ValueError("pool must be nonempty")
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, pool.num_classes, size=len(pool))
    return [
        core.LabelRecord(sample_id=s.id, label=int(k), source="random_warmup", round=0)
        for s, k in zip(pool.samples, draws)
    ]


def _round_metrics(params, pool, holdout, round_index, labeled_total) -> RoundMetrics:
    probs = model.predict_proba_batch(params, pool.features_matrix)
    return RoundMetrics(
        round=round_index,
        labeled_total=labeled_total,
        holdout_accuracy=evaluation.accuracy(params, holdout),
        mean_pool_uncertainty=float(np.mean(1.0 - probs.max(axis=1))),
    )


def _select_next(params, pool, excluded, m, selection, seed) -> list[int]:
    probs = model.predict_proba_batch(params, pool.features_matrix)
    if selection == "least_confidence":
        scores = [
            strategy.UncertaintyScore(sid, float(u))
            for sid, u in zip(pool.ids, 1.0 - probs.max(axis=1))
        ]
        return strategy.select_top(scores, m, excluded)
    return evaluation.baseline_select(selection, pool.ids, probs, m, excluded, seed=seed)


def _init_model(config: SessionConfig, dataset: core.Dataset):
    params = model.init_params(
        config.architecture,
        dataset.dim,
        dataset.num_classes,
        hidden_units=config.hidden_units,
        seed=_derived_seed(config.seed, _SEED_INIT),
    )
    return params, model.init_optimizer(params)


def start_session(config: SessionConfig, dataset: core.Dataset, session_id: str = "session") -> SessionState:
    """Initialize the model, run the random-label warmup, and queue round 1."""
    pool, holdout = split_for_session(dataset, config)
    plan = core.plan_rounds(config.budget, config.rounds)
    if config.budget > len(pool):
        raise BudgetExceedsPoolError("budget exceeds pool")

    params, opt = _init_model(config, dataset)
    warmup = warmup_random_labels(pool, _derived_seed(config.seed, _SEED_WARMUP_LABELS))
    if config.warmup_epochs > 0:
        warm_schedule = replace(config.schedule, epochs=config.warmup_epochs)
        pairs = [(pool.by_id[rec.sample_id].features, rec.label) for rec in warmup]
        params, opt = model.train(
            params,
            pairs,
            warm_schedule,
            _derived_seed(config.seed, _SEED_WARMUP_TRAIN),
            weighting=config.weighting,
            opt=opt,
        )
    initial = _round_metrics(params, pool, holdout, round_index=0, labeled_total=0)
    pending = _select_next(
        params,
        pool,
        set(),
        plan.per_round[0],
        config.selection,
        _derived_seed(config.seed, _SEED_SELECT, 1),
    )
    return SessionState(
        session_id=session_id,
        config=config,
        plan=plan,
        params=params,
        opt=opt,
        labels=tuple(warmup),
        current_round=1,
        pending_query=tuple(pending),
        history=(),
        status=STATUS_AWAITING,
        initial_metrics=initial,
    )


def submit_labels(
    state: SessionState, dataset: core.Dataset, answers, source: str = "human"
) -> SessionState:
    """Apply a complete answer set for the pending batch and advance the session.

    Everything is validated before any work happens, so a failed call leaves
    the input state untouched. The answers must cover pending_query exactly.
    Fine-tuning runs on all oracle labels purchased so far (warmup
    pseudo-labels are excluded); if rounds remain, the pool is rescored and
    the next quota selected, otherwise the session completes.
    """
    if state.status == STATUS_COMPLETE:
        raise SessionError("session already complete")
    if state.status != STATUS_AWAITING:
        raise SessionError(f"session is not awaiting labels (status {state.status!r})")
    if source not in ("human", "oracle_sim"):
        raise SessionError(f"invalid label source {source!r}")
    pending = set(state.pending_query)
    seen: set[int] = set()
    for sample_id, label in answers:
        if sample_id in seen:
            raise SessionError(f"duplicate answer for sample {sample_id}")
        seen.add(sample_id)
        if sample_id not in pending:
            raise SessionError(f"answer for non-pending sample {sample_id}")
        if not 0 <= label < dataset.num_classes:
            raise SessionError("label out of range")
    if seen != pending:
        raise SessionError(f"missing answers for {len(pending - seen)} pending samples")

    pool, holdout = split_for_session(dataset, state.config)
    config = state.config
    round_index = state.current_round
    new_records = tuple(
        core.LabelRecord(sample_id=sid, label=int(lab), source=source, round=round_index)
        for sid, lab in answers
    )
    labels = state.labels + new_records
    oracle_records = [rec for rec in labels if rec.source != "random_warmup"]
    pairs = [(pool.by_id[rec.sample_id].features, rec.label) for rec in oracle_records]

    if config.retrain_from_scratch:
        params, opt = _init_model(config, dataset)
    else:
        params, opt = state.params, state.opt
        if config.reset_optimizer_each_round:
            # stale second moments from earlier rounds damp the update
            # directions this round's data calls for
            opt = model.init_optimizer(params)
    params, opt = model.train(
        params,
        pairs,
        config.schedule,
        _derived_seed(config.seed, _SEED_TRAIN, round_index),
        weighting=config.weighting,
        opt=opt,
    )
    history = state.history + (
        _round_metrics(params, pool, holdout, round_index, len(oracle_records)),
    )

    if round_index < state.plan.rounds:
        excluded = {rec.sample_id for rec in oracle_records}
        pending_next = _select_next(
            params,
            pool,
            excluded,
            state.plan.per_round[round_index],
            config.selection,
            _derived_seed(config.seed, _SEED_SELECT, round_index + 1),
        )
        return replace(
            state,
            params=params,
            opt=opt,
            labels=labels,
            history=history,
            current_round=round_index + 1,
            pending_query=tuple(pending_next),
        )
    return replace(
        state,
        params=params,
        opt=opt,
        labels=labels,
        history=history,
        pending_query=(),
        status=STATUS_COMPLETE,
    )


def run_session(config: SessionConfig, dataset: core.Dataset, oracle: Oracle | None = None):
    """Drive a session to completion with a synchronous oracle.

    Returns (final params, final state, per-round history).
    """
    oracle = oracle if oracle is not None else SimulatedOracle(dataset)
    state = start_session(config, dataset)
    while state.status == STATUS_AWAITING:
        answers = [(sid, oracle.label_of(sid)) for sid in state.pending_query]
        state = submit_labels(state, dataset, answers, source="oracle_sim")
    return state.params, state, list(state.history)


# ---------------------------------------------------------------------------
# wire/persistence format

_CONFIG_FIELDS = {
    "dataset": str,
    "n": int,
    "r": int,
    "seed": int,
    "schedule": dict,
    "weighting": dict,
    "architecture": str,
    "hidden_units": int,
    "warmup_epochs": int,
    "holdout_fraction": (int, float),
    "selection": str,
    "retrain_from_scratch": bool,
    "reset_optimizer_each_round": bool,
}
_CONFIG_REQUIRED = ("dataset", "n", "r", "seed")
_SCHEDULE_FIELDS = {
    "epochs": int,
    "batch_size": int,
    "lr_start": (int, float),
    "lr_end": (int, float),
    "weighting_enabled": bool,
    "alpha": (int, float),
}
_WEIGHTING_FIELDS = {"alpha": (int, float), "norm_mode": str}


def _checked_fields(payload: dict, fields: dict, required=(), what: str = "config") -> dict:
    if not isinstance(payload, dict):
        raise SessionError(f"{what} must be an object")
    unknown = [k for k in payload if k not in fields]
    if unknown:
        raise SessionError(f"{what} has unknown fields: {', '.join(sorted(unknown))}")
    missing = [k for k in required if k not in payload]
    if missing:
        raise SessionError(f"{what} missing fields: {', '.join(missing)}")
    for key, typ in fields.items():
        if key in payload and (
            not isinstance(payload[key], typ) or isinstance(payload[key], bool) != (typ is bool)
        ):
            raise SessionError(f"{what} field {key!r} has the wrong type")
    return payload


def config_from_dict(payload: dict, default_epochs: int = 20) -> SessionConfig:
    """Strict wire-format parser; unknown or missing fields are rejected."""
    _checked_fields(payload, _CONFIG_FIELDS, _CONFIG_REQUIRED)
    sched_raw = _checked_fields(payload.get("schedule", {}), _SCHEDULE_FIELDS, what="schedule")
    weight_raw = _checked_fields(payload.get("weighting", {}), _WEIGHTING_FIELDS, what="weighting")
    try:
        schedule = model.TrainSchedule(epochs=sched_raw.get("epochs", default_epochs), **{
            k: v for k, v in sched_raw.items() if k != "epochs"
        })
        weighting = strategy.WeightingConfig(**weight_raw)
        return SessionConfig(
            dataset=payload["dataset"],
            budget=payload["n"],
            rounds=payload["r"],
            schedule=schedule,
            weighting=weighting,
            architecture=payload.get("architecture", "softmax_linear"),
            hidden_units=payload.get("hidden_units", 32),
            warmup_epochs=payload.get("warmup_epochs", 1),
            holdout_fraction=payload.get("holdout_fraction", 0.2),
            selection=payload.get("selection", "least_confidence"),
            retrain_from_scratch=payload.get("retrain_from_scratch", False),
            reset_optimizer_each_round=payload.get("reset_optimizer_each_round", False),
            seed=payload["seed"],
        )
    except ValueError as exc:
        raise SessionError(str(exc)) from exc


def config_to_dict(config: SessionConfig) -> dict:
    return {
        "dataset": config.dataset,
        "n": config.budget,
        "r": config.rounds,
        "seed": config.seed,
        "schedule": {
            "epochs": config.schedule.epochs,
            "batch_size": config.schedule.batch_size,
            "lr_start": config.schedule.lr_start,
            "lr_end": config.schedule.lr_end,
            "weighting_enabled": config.schedule.weighting_enabled,
            "alpha": config.schedule.alpha,
        },
        "weighting": {
            "alpha": config.weighting.alpha,
            "norm_mode": config.weighting.norm_mode,
        },
        "architecture": config.architecture,
        "hidden_units": config.hidden_units,
        "warmup_epochs": config.warmup_epochs,
        "holdout_fraction": config.holdout_fraction,
        "selection": config.selection,
        "retrain_from_scratch": config.retrain_from_scratch,
        "reset_optimizer_each_round": config.reset_optimizer_each_round,
    }


def _metrics_to_dict(m: RoundMetrics) -> dict:
    return {
        "round": m.round,
        "labeled_total": m.labeled_total,
        "holdout_accuracy": m.holdout_accuracy,
        "mean_pool_uncertainty": m.mean_pool_uncertainty,
    }


def _metrics_from_dict(d: dict) -> RoundMetrics:
    return RoundMetrics(
        round=d["round"],
        labeled_total=d["labeled_total"],
        holdout_accuracy=d["holdout_accuracy"],
        mean_pool_uncertainty=d["mean_pool_uncertainty"],
    )


def state_to_dict(state: SessionState) -> dict:
    return {
        "version": STATE_VERSION,
        "session_id": state.session_id,
        "config": config_to_dict(state.config),
        "plan": {
            "total_budget": state.plan.total_budget,
            "rounds": state.plan.rounds,
            "per_round": list(state.plan.per_round),
        },
        "params": model.params_to_dict(state.params),
        "opt": model.opt_to_dict(state.opt),
        "labels": [
            {"sample_id": r.sample_id, "label": r.label, "source": r.source, "round": r.round}
            for r in state.labels
        ],
        "current_round": state.current_round,
        "pending_query": list(state.pending_query),
        "history": [_metrics_to_dict(m) for m in state.history],
        "status": state.status,
        "initial_metrics": _metrics_to_dict(state.initial_metrics),
    }


def state_from_dict(payload: dict) -> SessionState:
    if payload.get("version") != STATE_VERSION:
        raise ValueError(f"unsupported state version {payload.get('version')!r}")
    params = model.params_from_dict(payload["params"])
    return SessionState(
        session_id=payload["session_id"],
        config=config_from_dict(payload["config"]),
        plan=core.RoundPlan(
            total_budget=payload["plan"]["total_budget"],
            rounds=payload["plan"]["rounds"],
            per_round=tuple(payload["plan"]["per_round"]),
        ),
        params=params,
        opt=model.opt_from_dict(payload["opt"], params),
        labels=tuple(
            core.LabelRecord(
                sample_id=r["sample_id"], label=r["label"], source=r["source"], round=r["round"]
            )
            for r in payload["labels"]
        ),
        current_round=payload["current_round"],
        pending_query=tuple(payload["pending_query"]),
        history=tuple(_metrics_from_dict(m) for m in payload["history"]),
        status=payload["status"],
        initial_metrics=_metrics_from_dict(payload["initial_metrics"]),
    )


def save_state(state: SessionState, path):
    """Atomic write of the versioned session state file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(state_to_dict(state), sort_keys=True))
    os.replace(tmp, path)


def load_state(path) -> SessionState:
    return state_from_dict(json.loads(Path(path).read_text()))
