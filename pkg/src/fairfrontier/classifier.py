"""Weighted logistic regression with a deterministic first-order solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Normalization

#: Decay constant of the default step schedule: eta_t = 1 / (L * (1 + decay * t)).
STEP_DECAY = 1e-4
STEP_RULES = ("inverse_lipschitz_decay",)


class TrainingDivergedError(RuntimeError):
    """Optimization produced a non-finite loss."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite loss at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class TrainConfig:
    # gradient_tolerance applies to the infinity norm of the weight-averaged
    # loss gradient, which keeps the stopping rule invariant under joint
    # rescaling of weights and penalty.
    l2_lambda: float = 1e-4
    max_iterations: int = 5000
    gradient_tolerance: float = 1e-6
    step_rule: str = "inverse_lipschitz_decay"
    # Initialization is the zero vector, so the seed changes nothing by default;
    # kept so alternative step rules can be added without an interface break.
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gradient_tolerance <= 0:
            raise ValueError("gradient_tolerance must be > 0")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"unknown step_rule: {self.step_rule!r}")


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """Fitted coefficients plus the scaling statistics they were fit under."""

    coefficients: np.ndarray
    intercept: float
    normalization: Normalization
    l2_lambda: float
    iterations: int
    final_gradient_norm: float


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_gradient(
    params: np.ndarray,
    features: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
    l2_lambda: float,
) -> tuple[float, np.ndarray]:
    """Weighted negative log-likelihood plus L2 penalty, with exact gradient.

    params is the coefficient vector with the intercept appended; the
    intercept is not penalized.
    """
    params = np.asarray(params, dtype=np.float64)
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if features.ndim != 2 or params.shape != (features.shape[1] + 1,):
        raise ValueError("params must have one entry per feature plus an intercept")
    if labels.shape != (features.shape[0],) or weights.shape != labels.shape:
        raise ValueError("features, labels, and weights must agree in length")
    if not (np.isfinite(params).all() and np.isfinite(features).all() and np.isfinite(weights).all()):
        raise ValueError("non-finite input")
    if (weights < 0).any():
        raise ValueError("weights must be >= 0")

    coef, intercept = params[:-1], params[-1]
    z = features @ coef + intercept
    # log(1 + e^z) - y*z, the per-example log loss, computed overflow-free.
    loss = float(weights @ (np.logaddexp(0.0, z) - labels * z))
    loss += 0.5 * l2_lambda * float(coef @ coef)

    residual = weights * (_sigmoid(z) - labels)
    grad = np.empty_like(params)
    grad[:-1] = features.T @ residual + l2_lambda * coef
    grad[-1] = residual.sum()
    return loss, grad


def _lipschitz_bound(features: np.ndarray, weights: np.ndarray, l2_lambda: float) -> float:
    """Smoothness constant of the weighted loss over (coefficients, intercept)."""
    aug = np.hstack([features, np.ones((features.shape[0], 1))])
    scaled = aug * np.sqrt(weights)[:, None]
    gram = scaled.T @ scaled
    lmax = float(np.linalg.eigvalsh(gram)[-1])
    return 0.25 * lmax + l2_lambda


def train(
    features: np.ndarray,
    labels: np.ndarray,
    weights: np.ndarray,
    config: TrainConfig,
    normalization: Normalization,
) -> LogisticModel:
    """Fit by gradient descent from the zero vector with a diminishing step.

    The step starts at the inverse smoothness bound, which makes every
    iteration a descent step; runs stop at the gradient tolerance (infinity
    norm) or the iteration cap. Identical inputs give a bit-identical model.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    active = weights > 0
    present = set(np.unique(labels[active]).tolist())
    if not {0.0, 1.0} <= present:
        raise ValueError("need at least one positive-weight example of each label")

    lips = _lipschitz_bound(features, weights, config.l2_lambda)
    weight_scale = float(weights.sum())
    params = np.zeros(features.shape[1] + 1, dtype=np.float64)
    steps = 0
    for t in range(config.max_iterations):
        loss, grad = loss_and_gradient(params, features, labels, weights, config.l2_lambda)
        if not np.isfinite(loss):
            raise TrainingDivergedError(iteration=t)
        if np.abs(grad).max() / weight_scale <= config.gradient_tolerance:
            break
        eta = 1.0 / (lips * (1.0 + STEP_DECAY * t))
        params = params - eta * grad
        steps = t + 1

    loss, grad = loss_and_gradient(params, features, labels, weights, config.l2_lambda)
    if not np.isfinite(loss):
        raise TrainingDivergedError(iteration=steps)
    coefficients = params[:-1].copy()
    coefficients.setflags(write=False)
    return LogisticModel(
        coefficients=coefficients,
        intercept=float(params[-1]),
        normalization=normalization,
        l2_lambda=config.l2_lambda,
        iterations=steps,
        final_gradient_norm=float(np.abs(grad).max() / weight_scale),
    )


def predict_scores(model: LogisticModel, features: np.ndarray) -> np.ndarray:
    """Re-offense probabilities for raw encoded feature rows.

    Applies the model's stored normalization before the linear map; outputs
    stay inside the open interval (0, 1) so thresholds 0 and 1 keep their
    all-positive / all-negative meaning.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.coefficients.shape[0]:
        raise ValueError(
            f"feature dimension {features.shape} does not match model "
            f"({model.coefficients.shape[0]} features)"
        )
    z = model.normalization.apply(features) @ model.coefficients + model.intercept
    return np.clip(_sigmoid(z), 1e-15, 1.0 - 1e-15)


def classify(scores: np.ndarray, threshold: float) -> np.ndarray:
    """Binary predictions: 1 (re-offend) iff score >= threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must be in [0, 1]")
    return (np.asarray(scores) >= threshold).astype(np.int64)
