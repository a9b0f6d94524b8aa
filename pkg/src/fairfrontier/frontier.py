"""Generate the reweighted model family and Pareto-filter the error/disparity points."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .classifier import LogisticModel, TrainConfig, TrainingDivergedError, classify, predict_scores, train
from .dataset import BalancedDataset, FeatureMatrix, encode, split
from .metrics import GroupConfusion, disparity, group_confusion, threshold_sweep, validate_grid

if TYPE_CHECKING:
    from .store import ModelFamilyArtifact


@dataclass(frozen=True)
class GridPoint:
    """Training-weight multipliers for group a1: alpha on label 1, beta on label 0."""

    alpha: float
    beta: float


@dataclass(frozen=True)
class GridConfig:
    levels: int = 9
    span: float = 4.0

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.span <= 1.0:
            raise ValueError("span must be > 1")


@dataclass(frozen=True, eq=False)
class Candidate:
    model_id: str
    grid: GridPoint
    model: LogisticModel


@dataclass(frozen=True)
class TrainingFailure:
    model_id: str
    grid: GridPoint
    reason: str


@dataclass(frozen=True, eq=False)
class FrontierPoint:
    """One candidate's (errors, disparity) at a fixed threshold, with provenance."""

    model_id: str
    grid: GridPoint
    threshold: float
    errors: int
    disparity: int
    group_confusion: GroupConfusion


@dataclass(frozen=True, eq=False)
class FrontierSet:
    """Non-dominated points at one threshold, ascending by disparity."""

    attribute: str
    threshold: float
    points: tuple[FrontierPoint, ...]


def weight_grid(config: GridConfig) -> list[GridPoint]:
    """Cartesian grid of log-spaced weight multipliers on [1/span, span].

    Always contains (1, 1), the unweighted model: the exact midpoint when
    levels is odd, otherwise the value nearest 1 is snapped to 1.
    """
    if config.levels == 1:
        values = np.array([1.0])
    else:
        exponent = np.log10(config.span)
        values = 10.0 ** np.linspace(-exponent, exponent, config.levels)
        values[np.abs(np.log10(values)).argmin()] = 1.0
    return [GridPoint(alpha=float(a), beta=float(b)) for a in values for b in values]


def example_weights(labels: np.ndarray, groups: np.ndarray, point: GridPoint) -> np.ndarray:
    """Per-example training weights; group a0 is pinned at 1."""
    labels = np.asarray(labels)
    groups = np.asarray(groups)
    weights = np.ones(labels.shape[0], dtype=np.float64)
    weights[(groups == 1) & (labels == 1)] = point.alpha
    weights[(groups == 1) & (labels == 0)] = point.beta
    return weights


def _model_id(index: int, total: int) -> str:
    return f"m{index:0{max(3, len(str(total - 1)))}d}"


def generate_candidates(
    matrix: FeatureMatrix,
    train_idx: np.ndarray,
    grid: list[GridPoint],
    config: TrainConfig,
    workers: int = 1,
) -> tuple[list[Candidate], list[TrainingFailure]]:
    """Train one model per grid point on the training rows.

    Results come back in grid order whatever the worker schedule; a candidate
    whose training diverges is excluded and reported, not raised.
    """
    train_idx = np.asarray(train_idx, dtype=np.int64)
    rows = matrix.rows[train_idx]
    labels = matrix.labels[train_idx]
    groups = matrix.groups[train_idx]

    def fit(indexed: tuple[int, GridPoint]) -> Candidate | TrainingFailure:
        i, point = indexed
        model_id = _model_id(i, len(grid))
        weights = example_weights(labels, groups, point)
        try:
            model = train(rows, labels, weights, config, matrix.normalization)
        except TrainingDivergedError as exc:
            return TrainingFailure(model_id=model_id, grid=point, reason=str(exc))
        return Candidate(model_id=model_id, grid=point, model=model)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fit, enumerate(grid)))
    else:
        results = [fit(item) for item in enumerate(grid)]

    candidates = [r for r in results if isinstance(r, Candidate)]
    failures = [r for r in results if isinstance(r, TrainingFailure)]
    return candidates, failures


def score_candidates(candidates: list[Candidate], features: np.ndarray) -> np.ndarray:
    """Score matrix of shape (n_candidates, n_rows) on raw encoded features."""
    return np.stack([predict_scores(c.model, features) for c in candidates])


def evaluate_scores(
    candidates: list[Candidate],
    scores: np.ndarray,
    labels: np.ndarray,
    groups: np.ndarray,
    threshold: float,
    attribute: str,
) -> list[FrontierPoint]:
    points = []
    for cand, row in zip(candidates, scores):
        gc = group_confusion(classify(row, threshold), labels, groups, attribute)
        points.append(
            FrontierPoint(
                model_id=cand.model_id,
                grid=cand.grid,
                threshold=threshold,
                errors=gc.overall.errors,
                disparity=disparity(gc),
                group_confusion=gc,
            )
        )
    return points


def evaluate_candidates(
    candidates: list[Candidate],
    features: np.ndarray,
    labels: np.ndarray,
    groups: np.ndarray,
    threshold: float,
    attribute: str,
) -> list[FrontierPoint]:
    """One FrontierPoint per candidate at the given threshold."""
    return evaluate_scores(
        candidates, score_candidates(candidates, features), labels, groups, threshold, attribute
    )


def pareto_filter(points: list[FrontierPoint]) -> FrontierSet:
    """Keep exactly the points no other point weakly dominates.

    Weak dominance: at most equal on both criteria and strictly better on
    one. Points tied on both criteria keep the lowest model_id. Output is
    sorted by ascending disparity, so errors come out non-increasing.
    """
    if not points:
        raise ValueError("cannot filter an empty point list")
    attribute = points[0].group_confusion.attribute
    threshold = points[0].threshold
    for p in points:
        if p.threshold != threshold or p.group_confusion.attribute != attribute:
            raise ValueError("all points must share one attribute and threshold")

    ranked = sorted(points, key=lambda p: (p.disparity, p.errors, p.model_id))
    kept: list[FrontierPoint] = []
    best_errors = None
    for p in ranked:
        if best_errors is None or p.errors < best_errors:
            kept.append(p)
            best_errors = p.errors
    return FrontierSet(attribute=attribute, threshold=threshold, points=tuple(kept))


def build_family(
    dataset: BalancedDataset,
    threshold_grid,
    grid_config: GridConfig,
    train_config: TrainConfig,
    *,
    train_fraction: float = 0.7,
    split_seed: int | None = None,
    eval_scope: str = "full",
    workers: int = 1,
    built_at: str | None = None,
    dataset_provenance: dict | None = None,
) -> "ModelFamilyArtifact":
    """Train the family once, evaluate it at every threshold, and assemble the artifact.

    eval_scope picks the rows the served counts are computed on: the whole
    balanced dataset ("full", the default) or the held-out split ("test").
    The returned artifact also carries the unweighted model's threshold sweep
    and per-(model, threshold) group confusions for every candidate.
    """
    from .store import SCHEMA_VERSION, ModelFamilyArtifact

    if eval_scope not in ("full", "test"):
        raise ValueError("eval_scope must be 'full' or 'test'")
    grid = validate_grid(threshold_grid)
    seed = dataset.seed if split_seed is None else split_seed
    train_idx, test_idx = split(dataset, train_fraction, seed)
    matrix = encode(dataset, train_idx)

    points = weight_grid(grid_config)
    candidates, failures = generate_candidates(matrix, train_idx, points, train_config, workers)
    unweighted = next(
        (c for c in candidates if c.grid.alpha == 1.0 and c.grid.beta == 1.0), None
    )
    if unweighted is None:
        raise RuntimeError("the unweighted (1, 1) candidate failed to train")

    test_scores = predict_scores(unweighted.model, matrix.raw[test_idx])
    test_accuracy = float(
        np.mean(classify(test_scores, 0.5) == matrix.labels[test_idx])
    )

    eval_idx = test_idx if eval_scope == "test" else np.arange(len(dataset.records))
    eval_raw = matrix.raw[eval_idx]
    eval_labels = matrix.labels[eval_idx]
    eval_groups = matrix.groups[eval_idx]

    scores = score_candidates(candidates, eval_raw)
    frontiers: dict[float, FrontierSet] = {}
    evaluations: dict[str, dict[float, GroupConfusion]] = {c.model_id: {} for c in candidates}
    for t in grid:
        t = float(t)
        evaluated = evaluate_scores(candidates, scores, eval_labels, eval_groups, t, dataset.attribute)
        frontiers[t] = pareto_filter(evaluated)
        for point in evaluated:
            evaluations[point.model_id][t] = point.group_confusion

    sweep = threshold_sweep(unweighted.model, eval_raw, eval_labels, grid)

    n0 = int(np.sum(eval_groups == 0))
    n1 = int(np.sum(eval_groups == 1))
    metadata = {
        "attribute": dataset.attribute,
        "group_labels": list(dataset.group_labels),
        "dataset": {
            "size": len(dataset.records),
            "per_group_n": len(dataset.records) // 2,
            "balance_seed": dataset.seed,
            "split_seed": seed,
            "train_fraction": train_fraction,
            "train_size": int(train_idx.size),
            "test_size": int(test_idx.size),
            **(dataset_provenance or {}),
        },
        "eval_scope": eval_scope,
        "eval_group_sizes": [n0, n1],
        "feature_names": list(matrix.feature_names),
        "dropped_features": list(matrix.dropped),
        "thresholds": [float(t) for t in grid],
        "weight_grid": {
            "levels": grid_config.levels,
            "span": grid_config.span,
            "alphas": sorted({p.alpha for p in points}),
            "betas": sorted({p.beta for p in points}),
        },
        "train_config": {
            "l2_lambda": train_config.l2_lambda,
            "max_iterations": train_config.max_iterations,
            "gradient_tolerance": train_config.gradient_tolerance,
            "step_rule": train_config.step_rule,
            "seed": train_config.seed,
        },
        "training_failures": [
            {"model_id": f.model_id, "alpha": f.grid.alpha, "beta": f.grid.beta, "reason": f.reason}
            for f in failures
        ],
        "unweighted_model_id": unweighted.model_id,
        "test_accuracy": test_accuracy,
        "built_at": built_at,
    }
    return ModelFamilyArtifact(
        schema_version=SCHEMA_VERSION,
        metadata=metadata,
        models={c.model_id: c for c in candidates},
        normalization=matrix.normalization,
        sweep=sweep,
        frontiers={dataset.attribute: frontiers},
        evaluations=evaluations,
    )
