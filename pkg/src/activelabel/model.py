"""From-scratch probabilistic classifiers and their training loop.

Two small dense architectures (softmax regression and a one-hidden-layer tanh
network) are trained on the objective sum_i w_i * CE(f(x_i), y_i), where the
per-sample weights w come from the batch's uncertainty scores and are treated
as constants (no gradient flows through them). Updates use AdamW with
decoupled weight decay under a cosine learning-rate schedule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .strategy import WeightingConfig, batch_weights

ARCHITECTURES = ("softmax_linear", "mlp_1hidden")

LOG_EPS = 1e-12  # clamp inside log so a zero probability stays finite
ADAM_EPS = 1e-8
CHECKPOINT_VERSION = 1


class DivergedError(RuntimeError):
    """Training produced non-finite values."""


def weight_shapes(architecture: str, dim: int, num_classes: int, hidden_units: int):
    if architecture == "softmax_linear":
        return ((dim, num_classes), (num_classes,))
    if architecture == "mlp_1hidden":
        return (
            (dim, hidden_units),
            (hidden_units,),
            (hidden_units, num_classes),
            (num_classes,),
        )
    raise ValueError(f"unknown architecture {architecture!r}")


@dataclass(frozen=True)
class ClassifierParams:
    """Immutable weight snapshot of one classifier."""

    architecture: str
    num_classes: int
    dim: int
    hidden_units: int
    weights: tuple[np.ndarray, ...]

    def __post_init__(self):
        expected = weight_shapes(
            self.architecture, self.dim, self.num_classes, self.hidden_units
        )
        shapes = tuple(w.shape for w in self.weights)
        if shapes != expected:
            raise ValueError(f"weight shapes {shapes} do not match {expected}")
        for w in self.weights:
            if not np.all(np.isfinite(w)):
                raise DivergedError("diverged")
            w.setflags(write=False)


@dataclass(frozen=True)
class OptimizerState:
    """AdamW moment estimates plus hyperparameters; step counts completed updates."""

    first_moment: tuple[np.ndarray, ...]
    second_moment: tuple[np.ndarray, ...]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 1e-5
    eps: float = ADAM_EPS


@dataclass(frozen=True)
class TrainSchedule:
    """Epochs, batching, learning-rate range, and loss-weighting switches."""

    epochs: int
    batch_size: int = 42
    lr_start: float = 1e-3
    lr_end: float = 1e-5
    weighting_enabled: bool = True
    alpha: float = 1.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not (self.lr_start >= self.lr_end > 0):
            raise ValueError("need lr_start >= lr_end > 0")


INIT_SCALE = 0.1  # keeps the untrained model near-uniform so early uncertainty is high


def init_params(
    architecture: str, dim: int, num_classes: int, hidden_units: int = 32, seed=0
) -> ClassifierParams:
    """Small random weight matrices (std 0.1/sqrt(fan_in)), zero biases."""
    if num_classes < 2 or dim < 1:
        raise ValueError("need num_classes >= 2 and dim >= 1")
    if architecture == "mlp_1hidden" and hidden_units < 1:
        raise ValueError("hidden_units must be >= 1")
    rng = np.random.default_rng(seed)
    weights = []
    for shape in weight_shapes(architecture, dim, num_classes, hidden_units):
        if len(shape) == 1:
            weights.append(np.zeros(shape))
        else:
            weights.append(rng.normal(0.0, INIT_SCALE / math.sqrt(shape[0]), shape))
    return ClassifierParams(
        architecture=architecture,
        num_classes=num_classes,
        dim=dim,
        hidden_units=hidden_units if architecture == "mlp_1hidden" else 0,
        weights=tuple(weights),
    )


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward(params: ClassifierParams, x: np.ndarray):
    """Class probabilities for an (n, d) batch, plus the hidden activations."""
    if params.architecture == "softmax_linear":
        w, b = params.weights
        return _softmax(x @ w + b), None
    w1, b1, w2, b2 = params.weights
    hidden = np.tanh(x @ w1 + b1)
    return _softmax(hidden @ w2 + b2), hidden


def predict_proba_batch(params: ClassifierParams, x) -> np.ndarray:
    """Probability rows for an (n, d) feature matrix."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != params.dim:
        raise ValueError("dimension mismatch")
    probs, _ = _forward(params, x)
    if not np.all(np.isfinite(probs)):
        raise DivergedError("diverged")
    return probs


def predict_proba(params: ClassifierParams, features) -> np.ndarray:
    """Normalized class probabilities for one feature vector."""
    x = np.asarray(features, dtype=float)
    if x.shape != (params.dim,):
        raise ValueError("dimension mismatch")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    return predict_proba_batch(params, x[None, :])[0]


def cross_entropy(probs, label: int) -> float:
    """-log p[label], clamped at 1e-12."""
    p = np.asarray(probs, dtype=float)
    if not 0 <= label < p.size:
        raise ValueError("label out of range")
    return -math.log(max(float(p[label]), LOG_EPS))


def _check_weights(weights, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValueError("length mismatch")
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    return w


def weighted_batch_loss(losses, weights) -> float:
    """Weighted sum of per-sample losses; uniform weights give the plain mean."""
    l = np.asarray(losses, dtype=float)
    if l.ndim != 1:
        raise ValueError("losses must be a 1-d vector")
    w = _check_weights(weights, l.size)
    return float(w @ l)


def _grad_arrays(params: ClassifierParams, x: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Gradient tensors of sum_i w_i * CE(f(x_i), y_i) in params.weights order."""
    if x.shape[1] != params.dim:
        raise ValueError("dimension mismatch")
    probs, hidden = _forward(params, x)
    delta = probs  # freshly allocated by _forward, safe to reuse in place
    delta[np.arange(y.size), y] -= 1.0
    delta *= w[:, None]
    if params.architecture == "softmax_linear":
        return (x.T @ delta, delta.sum(axis=0))
    w2 = params.weights[2]
    g_w2 = hidden.T @ delta
    g_b2 = delta.sum(axis=0)
    back = (delta @ w2.T) * (1.0 - hidden**2)
    return (x.T @ back, back.sum(axis=0), g_w2, g_b2)


def grad_weighted_ce(params: ClassifierParams, batch, weights):
    """Analytic gradient of the weighted cross-entropy batch objective.

    ``batch`` is a sequence of (features, label) pairs; ``weights`` must be
    nonnegative and sum to one. The weights are constants: nothing is
    differentiated through the uncertainty that produced them.
    """
    if not batch:
        raise ValueError("batch must be nonempty")
    x = np.stack([np.asarray(f, dtype=float) for f, _ in batch])
    y = np.array([int(lab) for _, lab in batch], dtype=np.int64)
    if np.any(y < 0) or np.any(y >= params.num_classes):
        raise ValueError("label out of range")
    w = _check_weights(weights, len(batch))
    return _grad_arrays(params, x, y, w)


def cosine_lr(t: int, total_steps: int, lr_start: float = 1e-3, lr_end: float = 1e-5) -> float:
    """Cosine decay from lr_start at t=0 to lr_end at t=total_steps.

    Both endpoints are returned exactly; in between the rate follows
    lr_end + 0.5 * (lr_start - lr_end) * (1 + cos(pi * t / total_steps)).
    """
    if total_steps < 1:
        raise ValueError("total_steps must be >= 1")
    if not 0 <= t <= total_steps:
        raise ValueError("t out of range")
    if t == 0:
        return lr_start
    if t == total_steps:
        return lr_end
    return lr_end + 0.5 * (lr_start - lr_end) * (1.0 + math.cos(math.pi * t / total_steps))


def init_optimizer(params: ClassifierParams, weight_decay: float = 1e-5) -> OptimizerState:
    return OptimizerState(
        first_moment=tuple(np.zeros_like(w) for w in params.weights),
        second_moment=tuple(np.zeros_like(w) for w in params.weights),
        weight_decay=weight_decay,
    )


def step(params: ClassifierParams, grads, opt: OptimizerState, lr: float):
    """One decoupled-weight-decay adaptive update; returns (params', opt').

    Per tensor, with bias-corrected moments m_hat and v_hat:
        w' = w - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * w
    """
    if not lr > 0:
        raise ValueError("lr must be positive")
    if len(grads) != len(params.weights):
        raise ValueError("gradient count mismatch")
    t = opt.step + 1
    new_w, new_m, new_v = [], [], []
    for wgt, g, m, v in zip(params.weights, grads, opt.first_moment, opt.second_moment):
        g = np.asarray(g, dtype=float)
        if g.shape != wgt.shape:
            raise ValueError("gradient shape mismatch")
        if not np.all(np.isfinite(g)):
            raise DivergedError("diverged")
        m = opt.beta1 * m + (1.0 - opt.beta1) * g
        v = opt.beta2 * v + (1.0 - opt.beta2) * (g * g)
        m_hat = m / (1.0 - opt.beta1**t)
        v_hat = v / (1.0 - opt.beta2**t)
        stepped = wgt - lr * (m_hat / (np.sqrt(v_hat) + opt.eps)) - lr * opt.weight_decay * wgt
        new_w.append(stepped)
        new_m.append(m)
        new_v.append(v)
    return (
        replace(params, weights=tuple(new_w)),
        replace(opt, first_moment=tuple(new_m), second_moment=tuple(new_v), step=t),
    )


def train(
    params: ClassifierParams,
    labeled,
    schedule: TrainSchedule,
    seed,
    weighting: WeightingConfig | None = None,
    opt: OptimizerState | None = None,
):
    """Mini-batch training over ``labeled`` pairs of (features, label).

    Each epoch shuffles the data with ``np.random.default_rng(seed)`` and walks
    it in batches of ``schedule.batch_size``, keeping the final short batch.
    With weighting enabled, batch weights come from ``strategy.batch_weights``
    applied to the current model's uncertainties (1 - max probability),
    recomputed every time a batch is visited; otherwise every batch uses the
    uniform weight vector 1/b. The learning rate follows ``cosine_lr`` over
    epochs * batches_per_epoch steps, indexed from 0.

    Returns (trained params, final optimizer state); deterministic given seed.
    """
    labeled = list(labeled)
    if not labeled:
        raise ValueError("labeled set must be nonempty")
    x = np.stack([np.asarray(f, dtype=float) for f, _ in labeled])
    y = np.array([int(lab) for _, lab in labeled], dtype=np.int64)
    if x.shape[1] != params.dim:
        raise ValueError("dimension mismatch")
    if np.any(y < 0) or np.any(y >= params.num_classes):
        raise ValueError("label out of range")
    if weighting is None:
        weighting = WeightingConfig(alpha=schedule.alpha)
    if opt is None:
        opt = init_optimizer(params)

    n = x.shape[0]
    batches_per_epoch = math.ceil(n / schedule.batch_size)
    total_steps = schedule.epochs * batches_per_epoch
    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(schedule.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, schedule.batch_size):
            idx = perm[start : start + schedule.batch_size]
            xb, yb = x[idx], y[idx]
            if schedule.weighting_enabled:
                probs, _ = _forward(params, xb)
                scores = 1.0 - probs.max(axis=1)
                w = batch_weights(scores, weighting)
            else:
                w = np.full(idx.size, 1.0 / idx.size)
            grads = _grad_arrays(params, xb, yb, w)
            lr = cosine_lr(t, total_steps, schedule.lr_start, schedule.lr_end)
            params, opt = step(params, grads, opt, lr)
            t += 1
    return params, opt


def params_to_dict(params: ClassifierParams) -> dict:
    return {
        "architecture": params.architecture,
        "num_classes": params.num_classes,
        "dim": params.dim,
        "hidden_units": params.hidden_units,
        "weights": [
            {"shape": list(w.shape), "data": w.ravel().tolist()} for w in params.weights
        ],
    }


def params_from_dict(payload: dict) -> ClassifierParams:
    weights = tuple(
        np.array(entry["data"], dtype=float).reshape(entry["shape"])
        for entry in payload["weights"]
    )
    return ClassifierParams(
        architecture=payload["architecture"],
        num_classes=payload["num_classes"],
        dim=payload["dim"],
        hidden_units=payload["hidden_units"],
        weights=weights,
    )


def opt_to_dict(opt: OptimizerState) -> dict:
    return {
        "step": opt.step,
        "beta1": opt.beta1,
        "beta2": opt.beta2,
        "weight_decay": opt.weight_decay,
        "eps": opt.eps,
        "first_moment": [m.ravel().tolist() for m in opt.first_moment],
        "second_moment": [v.ravel().tolist() for v in opt.second_moment],
    }


def opt_from_dict(payload: dict, params: ClassifierParams) -> OptimizerState:
    shapes = [w.shape for w in params.weights]
    unflatten = lambda flats: tuple(
        np.array(flat, dtype=float).reshape(shape) for flat, shape in zip(flats, shapes)
    )
    return OptimizerState(
        first_moment=unflatten(payload["first_moment"]),
        second_moment=unflatten(payload["second_moment"]),
        step=payload["step"],
        beta1=payload["beta1"],
        beta2=payload["beta2"],
        weight_decay=payload["weight_decay"],
        eps=payload["eps"],
    )


def save_checkpoint(path, params: ClassifierParams, opt: OptimizerState | None = None):
    """Versioned JSON checkpoint; floats round-trip bit-exactly."""
    payload = {
        "version": CHECKPOINT_VERSION,
        "params": params_to_dict(params),
        "optimizer": None if opt is None else opt_to_dict(opt),
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True))


def load_checkpoint(path):
    """Read a checkpoint back as (params, optimizer state or None)."""
    payload = json.loads(Path(path).read_text())
    if payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')!r}")
    params = params_from_dict(payload["params"])
    opt = None if payload["optimizer"] is None else opt_from_dict(payload["optimizer"], params)
    return params, opt
