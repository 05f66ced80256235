"""Metrics and comparison selectors: accuracy, output divergence, baselines.

The divergence metric compares a model trained on the full label set against
one trained on the purchased budget: the empirical mean, over a holdout the
learner never sees, of the squared distance between their probability outputs.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ClassifierParams, predict_proba_batch
from .strategy import PoolExhaustedError, UncertaintyScore, select_top

BASELINE_KINDS = ("random", "entropy", "margin", "least_confidence")


def accuracy(params: ClassifierParams, dataset) -> float:
    """Fraction of samples whose argmax prediction matches the true label.

    Argmax ties resolve to the smallest class index.
    """
    if len(dataset) == 0:
        raise ValueError("dataset must be nonempty")
    probs = predict_proba_batch(params, dataset.features_matrix)
    preds = np.argmax(probs, axis=1)
    return float(np.mean(preds == dataset.true_labels))


def representativeness_divergence(
    params_full: ClassifierParams, params_budget: ClassifierParams, holdout
) -> float:
    """Mean squared distance between two models' probability outputs.

    Per holdout point this is ||p_full - p_budget||^2, which lies in [0, 2];
    the reported value is the empirical mean over the holdout. Zero for
    identical models, 2 when the outputs are disjoint one-hot vectors.
    """
    if (params_full.num_classes, params_full.dim) != (
        params_budget.num_classes,
        params_budget.dim,
    ):
        raise ValueError("dimension mismatch")
    if len(holdout) == 0:
        raise ValueError("holdout must be nonempty")
    p_full = predict_proba_batch(params_full, holdout.features_matrix)
    p_budget = predict_proba_batch(params_budget, holdout.features_matrix)
    return float(np.mean(np.sum((p_full - p_budget) ** 2, axis=1)))


def entropy_scores(probs: np.ndarray) -> np.ndarray:
    """Predictive entropy per row, with 0 * log 0 taken as 0."""
    p = np.asarray(probs, dtype=float)
    terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=1)


def margin_scores(probs: np.ndarray) -> np.ndarray:
    """Top-two probability gap per row; small means ambiguous."""
    part = np.sort(np.asarray(probs, dtype=float), axis=1)
    return part[:, -1] - part[:, -2]


def baseline_select(kind: str, ids, probs, m: int, excluded=frozenset(), seed=0) -> list[int]:
    """Query selection baselines over pool posteriors.

    random: uniform without replacement (seeded). entropy: highest predictive
    entropy first. margin: smallest top-two gap first. least_confidence:
    identical ranking to ``strategy.select_top`` on 1 - max probability.
    Ties break toward the smaller sample id.
    """
    if kind not in BASELINE_KINDS:
        raise ValueError(f"unknown baseline {kind!r}")
    ids = list(ids)
    if kind == "random":
        candidates = [i for i in ids if i not in excluded]
        if len(candidates) < m:
            raise PoolExhaustedError("pool exhausted")
        rng = np.random.default_rng(seed)
        picked = rng.choice(len(candidates), size=m, replace=False)
        return [candidates[int(j)] for j in picked]
    p = np.asarray(probs, dtype=float)
    if kind == "entropy":
        scores = entropy_scores(p)
    elif kind == "margin":
        scores = -margin_scores(p)
    else:
        scores = 1.0 - p.max(axis=1)
    ranked = [UncertaintyScore(i, float(s)) for i, s in zip(ids, scores)]
    return select_top(ranked, m, excluded)


def sign_test(diffs) -> float:
    """One-sided paired sign test p-value for median(diff) > 0.

    Zero differences are discarded; returns P[Binomial(n, 1/2) >= k] where k
    counts the positive differences among the n nonzero ones.
    """
    nonzero = [d for d in diffs if d != 0]
    n = len(nonzero)
    if n == 0:
        return 1.0
    k = sum(1 for d in nonzero if d > 0)
    return sum(math.comb(n, i) for i in range(k, n + 1)) / 2.0**n
