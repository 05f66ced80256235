"""Uncertainty scoring, batch loss weights, and top-m query selection.

The uncertainty of a prediction is one minus its top class probability: zero
when the model is certain, 1 - 1/K when the output is uniform. Batch weights
rescale per-sample losses so the update leans on the samples the model is
least sure about: scores are min-max scaled within the batch and normalized
to sum to one, either through exponentials (alpha acts as a temperature) or
a plain linear ratio (where alpha cancels exactly).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORM_MODES = ("softmax_norm", "linear_norm")


class PoolExhaustedError(RuntimeError):
    """Fewer selectable samples remain than the requested query count."""


@dataclass(frozen=True)
class WeightingConfig:
    """How batch uncertainties turn into loss weights."""

    alpha: float = 1.0
    norm_mode: str = "softmax_norm"

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha <= 0:
            raise ValueError("alpha must be finite and positive")
        if self.norm_mode not in NORM_MODES:
            raise ValueError(f"unknown norm_mode {self.norm_mode!r}")


@dataclass(frozen=True)
class UncertaintyScore:
    sample_id: int
    score: float


def uncertainty(probs) -> float:
    """1 - max class probability, in [0, 1 - 1/K]."""
    return 1.0 - float(np.max(probs))


def batch_weights(scores, config: WeightingConfig) -> np.ndarray:
    """Per-sample loss weights for one batch of uncertainty scores.

    Scores are min-max scaled, then normalized to sum to one. softmax_norm
    exponentiates alpha * scaled first, so alpha sharpens the contrast;
    linear_norm divides the scaled scores by their sum, where alpha scales
    numerator and denominator identically and is therefore omitted (the
    least uncertain sample gets weight exactly zero). Degenerate batches
    (max == min) get uniform weights; a singleton batch gets [1.0].
    """
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1 or s.size < 1:
        raise ValueError("scores must be a nonempty 1-d vector")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    b = s.size
    if b == 1:
        return np.ones(1)
    lo = s.min()
    hi = s.max()
    if hi == lo:
        return np.full(b, 1.0 / b)
    scaled = (s - lo) / (hi - lo)
    if config.norm_mode == "linear_norm":
        return scaled / scaled.sum()
    e = np.exp(config.alpha * scaled)
    return e / e.sum()


def select_top(scores, m: int, excluded=frozenset()) -> list[int]:
    """The m highest-scoring sample ids not in ``excluded``.

    Ties break toward the smaller id; the result is ordered by descending
    score, then ascending id.
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    candidates = [sc for sc in scores if sc.sample_id not in excluded]
    if len(candidates) < m:
        raise PoolExhaustedError("pool exhausted")
    candidates.sort(key=lambda sc: (-sc.score, sc.sample_id))
    return [sc.sample_id for sc in candidates[:m]]
