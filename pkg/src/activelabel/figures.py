"""Matplotlib renderings of the delimited reports, saved next to them."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .experiment import summarize


def plot_accuracy_vs_budget(rows, path) -> Path:
    """One error-bar curve per method: mean holdout accuracy vs budget."""
    return _curve_plot(rows, path, "mean_accuracy", "var_accuracy", "holdout accuracy")


def plot_divergence_vs_budget(rows, path) -> Path:
    """One error-bar curve per method: mean divergence from the full-label model."""
    return _curve_plot(rows, path, "mean_divergence", "var_divergence", "divergence from full-label model")


def _curve_plot(rows, path, mean_key, var_key, ylabel) -> Path:
    summary = summarize(rows)
    methods = sorted({s["method"] for s in summary})
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for method in methods:
        points = sorted((s for s in summary if s["method"] == method), key=lambda s: s["budget"])
        budgets = [s["budget"] for s in points]
        means = [s[mean_key] for s in points]
        stds = [math.sqrt(s[var_key]) for s in points]
        ax.errorbar(budgets, means, yerr=stds, marker="o", capsize=3, label=method)
    ax.set_xlabel("labeling budget n")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_session_history(history, path, initial=None) -> Path:
    """Per-round holdout accuracy and mean pool uncertainty for one session."""
    rounds = [m.round for m in history]
    acc = [m.holdout_accuracy for m in history]
    unc = [m.mean_pool_uncertainty for m in history]
    if initial is not None:
        rounds = [initial.round] + rounds
        acc = [initial.holdout_accuracy] + acc
        unc = [initial.mean_pool_uncertainty] + unc
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 3.8))
    axes[0].plot(rounds, acc, marker="o")
    axes[0].set_xlabel("round")
    axes[0].set_ylabel("holdout accuracy")
    axes[0].grid(alpha=0.3)
    axes[1].plot(rounds, unc, marker="o", color="tab:orange")
    axes[1].set_xlabel("round")
    axes[1].set_ylabel("mean pool uncertainty")
    axes[1].grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
