"""Datasets, label records, and labeling-budget planning.

The pool is a fixed, finite collection of feature vectors whose ground-truth
labels stay hidden from the learner; only oracles and the evaluation harness
may read them.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

LABEL_SOURCES = ("oracle_sim", "human", "random_warmup")

_MANIFEST_REQUIRED = ("name", "num_classes", "dim", "features_file")
_MANIFEST_OPTIONAL = ("assets_dir",)


class DatasetError(ValueError):
    """A manifest or feature table violates the documented format."""


@dataclass(frozen=True)
class Sample:
    """One pool element; ``true_label`` is visible to oracles and eval only."""

    id: int
    features: np.ndarray
    true_label: int
    display_ref: str | None = None


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of samples over a fixed class space."""

    name: str
    num_classes: int
    dim: int
    samples: tuple[Sample, ...]

    def __post_init__(self):
        if self.num_classes < 2:
            raise DatasetError("num_classes must be at least 2")
        if self.dim < 1:
            raise DatasetError("dim must be at least 1")
        seen: set[int] = set()
        for s in self.samples:
            if s.features.shape != (self.dim,):
                raise DatasetError(f"sample {s.id}: dimension mismatch")
            if not 0 <= s.true_label < self.num_classes:
                raise DatasetError(f"sample {s.id}: label out of range")
            if s.id in seen:
                raise DatasetError(f"duplicate sample id {s.id}")
            seen.add(s.id)
            s.features.setflags(write=False)

    def __len__(self) -> int:
        return len(self.samples)

    @cached_property
    def features_matrix(self) -> np.ndarray:
        m = np.stack([s.features for s in self.samples])
        m.setflags(write=False)
        return m

    @cached_property
    def true_labels(self) -> np.ndarray:
        a = np.array([s.true_label for s in self.samples], dtype=np.int64)
        a.setflags(write=False)
        return a

    @cached_property
    def ids(self) -> tuple[int, ...]:
        return tuple(s.id for s in self.samples)

    @cached_property
    def by_id(self) -> dict[int, Sample]:
        return {s.id: s for s in self.samples}


@dataclass(frozen=True)
class LabelRecord:
    """One label assignment; warmup records never count against the budget."""

    sample_id: int
    label: int
    source: str
    round: int

    def __post_init__(self):
        if self.source not in LABEL_SOURCES:
            raise ValueError(f"unknown label source {self.source!r}")
        if self.round < 0:
            raise ValueError("round must be >= 0")


@dataclass(frozen=True)
class RoundPlan:
    """A budget of n queries split over r rounds."""

    total_budget: int
    rounds: int
    per_round: tuple[int, ...]


def plan_rounds(n: int, r: int) -> RoundPlan:
    """Split a labeling budget of n queries over r rounds.

    The first r-1 rounds each get floor(n/r) queries; the n mod r leftover
    queries go to the final round so exactly n labels are purchased.
    """
    if r < 1 or n < r:
        raise ValueError("invalid budget")
    per_round = [n // r] * r
    per_round[-1] += n % r
    return RoundPlan(total_budget=n, rounds=r, per_round=tuple(per_round))


def load_dataset(manifest_path) -> Dataset:
    """Load a dataset from a JSON manifest plus its delimited feature table.

    The manifest declares exactly {name, num_classes, dim, features_file} and
    optionally assets_dir; unknown or missing fields are rejected. The feature
    table holds one sample per line, ``id,f_1,...,f_d,label``, no header, with
    the path resolved relative to the manifest.
    """
    path = Path(manifest_path)
    if not path.is_file():
        raise DatasetError(f"manifest not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise DatasetError("manifest must be a JSON object")
    missing = [k for k in _MANIFEST_REQUIRED if k not in raw]
    if missing:
        raise DatasetError(f"manifest missing fields: {', '.join(missing)}")
    unknown = [k for k in raw if k not in _MANIFEST_REQUIRED + _MANIFEST_OPTIONAL]
    if unknown:
        raise DatasetError(f"manifest has unknown fields: {', '.join(sorted(unknown))}")

    name = raw["name"]
    num_classes = raw["num_classes"]
    dim = raw["dim"]
    if not isinstance(name, str) or not name:
        raise DatasetError("name must be a nonempty string")
    if not isinstance(num_classes, int) or num_classes < 2:
        raise DatasetError("num_classes must be an integer >= 2")
    if not isinstance(dim, int) or dim < 1:
        raise DatasetError("dim must be an integer >= 1")
    if not isinstance(raw["features_file"], str):
        raise DatasetError("features_file must be a string")
    assets_dir = raw.get("assets_dir")
    if assets_dir is not None and not isinstance(assets_dir, str):
        raise DatasetError("assets_dir must be a string")

    table = path.parent / raw["features_file"]
    if not table.is_file():
        raise DatasetError(f"features file not found: {table}")

    samples = []
    with open(table, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if len(row) != dim + 2:
                raise DatasetError(
                    f"{table.name}:{lineno}: expected {dim + 2} fields, got {len(row)}"
                )
            try:
                sample_id = int(row[0])
                feats = np.array([float(v) for v in row[1:-1]], dtype=float)
                label = int(row[-1])
            except ValueError as exc:
                raise DatasetError(f"{table.name}:{lineno}: {exc}") from exc
            if not 0 <= label < num_classes:
                raise DatasetError(f"{table.name}:{lineno}: label out of range")
            ref = f"{assets_dir}/{sample_id}.png" if assets_dir else None
            samples.append(
                Sample(id=sample_id, features=feats, true_label=label, display_ref=ref)
            )
    if not samples:
        raise DatasetError(f"feature table is empty: {table}")
    return Dataset(name=name, num_classes=num_classes, dim=dim, samples=tuple(samples))


def write_dataset(dataset: Dataset, manifest_path) -> Path:
    """Write a manifest plus feature table that ``load_dataset`` reads back."""
    path = Path(manifest_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table = path.with_suffix(".csv")
    with open(table, "w", newline="") as fh:
        writer = csv.writer(fh)
        for s in dataset.samples:
            writer.writerow([s.id, *[repr(float(v)) for v in s.features], s.true_label])
    manifest = {
        "name": dataset.name,
        "num_classes": dataset.num_classes,
        "dim": dataset.dim,
        "features_file": table.name,
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def class_centers(num_classes: int, dim: int) -> np.ndarray:
    """Deterministic unit-scale center layout: a line for d=1, a circle otherwise."""
    if dim == 1:
        offsets = np.arange(num_classes, dtype=float) - (num_classes - 1) / 2.0
        return offsets.reshape(-1, 1)
    centers = np.zeros((num_classes, dim))
    angles = 2.0 * np.pi * np.arange(num_classes) / num_classes
    centers[:, 0] = np.cos(angles)
    centers[:, 1] = np.sin(angles)
    return centers


def gen_synthetic(
    num_classes: int, dim: int, per_class: int, separation: float, seed: int
) -> Dataset:
    """Gaussian-mixture dataset: class k centered at separation * center_k.

    Unit isotropic covariance, ids 0..N-1 grouped by class, deterministic
    given the seed. ``separation`` controls how hard the task is.
    """
    if num_classes < 2 or dim < 1 or per_class < 1 or not separation > 0:
        raise ValueError("invalid parameters")
    rng = np.random.default_rng(seed)
    centers = separation * class_centers(num_classes, dim)
    noise = rng.standard_normal((num_classes * per_class, dim))
    samples = []
    for k in range(num_classes):
        for j in range(per_class):
            i = k * per_class + j
            samples.append(Sample(id=i, features=centers[k] + noise[i], true_label=k))
    name = f"synthetic-k{num_classes}-d{dim}-n{num_classes * per_class}-s{separation:g}-seed{seed}"
    return Dataset(name=name, num_classes=num_classes, dim=dim, samples=tuple(samples))


def split_holdout(dataset: Dataset, fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Deterministic stratified partition into (pool, holdout).

    Per class, floor(fraction * count) samples go to the holdout; both parts
    keep the original dataset order and together reproduce the input exactly.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    labels = dataset.true_labels
    hold_positions: set[int] = set()
    for k in range(dataset.num_classes):
        positions = np.flatnonzero(labels == k)
        n_hold = math.floor(fraction * len(positions) + 1e-9)
        if n_hold == 0:
            continue
        chosen = rng.permutation(len(positions))[:n_hold]
        hold_positions.update(int(p) for p in positions[chosen])
    if not hold_positions or len(hold_positions) == len(dataset):
        raise ValueError("fraction yields an empty part")
    pool = tuple(s for i, s in enumerate(dataset.samples) if i not in hold_positions)
    hold = tuple(s for i, s in enumerate(dataset.samples) if i in hold_positions)
    make = lambda part, samples: Dataset(
        name=f"{dataset.name}/{part}",
        num_classes=dataset.num_classes,
        dim=dataset.dim,
        samples=samples,
    )
    return make("pool", pool), make("holdout", hold)
