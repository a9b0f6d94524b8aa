"""Confusion counts, the between-group disparity measure, and threshold sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import LogisticModel, classify, predict_scores


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def errors(self) -> int:
        return self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
            tn=self.tn + other.tn,
        )


@dataclass(frozen=True)
class GroupConfusion:
    """Per-group confusion counts for one protected attribute."""

    attribute: str
    group_a0: ConfusionCounts
    group_a1: ConfusionCounts

    @property
    def overall(self) -> ConfusionCounts:
        return self.group_a0 + self.group_a1


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    counts: ConfusionCounts


@dataclass(frozen=True)
class SweepCurve:
    """Confusion counts over an increasing threshold grid."""

    points: tuple[SweepPoint, ...]


def _check_lengths(predictions: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    predictions = np.asarray(predictions, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if predictions.shape != labels.shape:
        raise ValueError("predictions and labels must have the same length")
    return predictions, labels


def confusion(predictions: np.ndarray, labels: np.ndarray) -> ConfusionCounts:
    """Count prediction outcomes; positive means predicted to re-offend."""
    predictions, labels = _check_lengths(predictions, labels)
    pos = predictions == 1
    truth = labels == 1
    return ConfusionCounts(
        tp=int(np.sum(pos & truth)),
        fp=int(np.sum(pos & ~truth)),
        fn=int(np.sum(~pos & truth)),
        tn=int(np.sum(~pos & ~truth)),
    )


def group_confusion(
    predictions: np.ndarray,
    labels: np.ndarray,
    groups: np.ndarray,
    attribute: str,
) -> GroupConfusion:
    """Confusion counts split by the binary group vector (0 = a0, 1 = a1)."""
    predictions, labels = _check_lengths(predictions, labels)
    groups = np.asarray(groups, dtype=np.int64)
    if groups.shape != labels.shape:
        raise ValueError("groups must have the same length as labels")
    mask = groups == 1
    return GroupConfusion(
        attribute=attribute,
        group_a0=confusion(predictions[~mask], labels[~mask]),
        group_a1=confusion(predictions[mask], labels[mask]),
    )


def disparity(gc: GroupConfusion) -> int:
    """The larger of the between-group gaps in FP counts and FN counts."""
    return max(
        abs(gc.group_a1.fp - gc.group_a0.fp),
        abs(gc.group_a1.fn - gc.group_a0.fn),
    )


def validate_grid(threshold_grid) -> np.ndarray:
    grid = np.asarray(threshold_grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("threshold grid must be non-empty")
    if (grid < 0).any() or (grid > 1).any():
        raise ValueError("thresholds must lie in [0, 1]")
    if grid.size > 1 and not (np.diff(grid) > 0).all():
        raise ValueError("thresholds must be strictly increasing")
    return grid


def threshold_sweep(
    model: LogisticModel,
    features: np.ndarray,
    labels: np.ndarray,
    threshold_grid,
) -> SweepCurve:
    """Confusion counts for one model at every threshold on the grid."""
    grid = validate_grid(threshold_grid)
    scores = predict_scores(model, features)
    points = tuple(
        SweepPoint(threshold=float(t), counts=confusion(classify(scores, float(t)), labels))
        for t in grid
    )
    return SweepCurve(points=points)
