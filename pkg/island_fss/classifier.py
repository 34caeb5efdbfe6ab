"""
Logistic-regression wrapper: training, prediction and the two objective scores.

Training is full-batch gradient descent on the mean negative log-likelihood
from zero-initialized weights, with an implicit intercept. The AUC objective
is the balanced accuracy (sensitivity + specificity) / 2 at a fixed
threshold; the cardinality objective is popcount / n_features.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from island_fss.dataset import Shard, project
from island_fss.errors import DatasetError, EvaluationError, TrainingError
from island_fss.mocore import Solution

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    """Optimizer mechanics of the logistic-regression wrapper."""

    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(0.1, gt=0)
    max_epochs: int = Field(100, ge=1)
    grad_tolerance: float = Field(1e-4, gt=0)
    threshold: float = Field(0.5, gt=0, lt=1)


@dataclass(frozen=True, eq=False)
class LrModel:
    """Trained coefficients: one weight per projected column plus an intercept."""

    weights: np.ndarray
    intercept: float

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64).ravel()
        if not np.isfinite(weights).all() or not np.isfinite(self.intercept):
            raise ValueError("model coefficients must be finite")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "intercept", float(self.intercept))

    def negated(self) -> "LrModel":
        return LrModel(-self.weights, -self.intercept)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    tn: int
    fp: int

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.tn + self.fp

    @property
    def sensitivity(self) -> float:
        return self.tp / (self.tp + self.fn)

    @property
    def specificity(self) -> float:
        return self.tn / (self.tn + self.fp)


def _check_training_inputs(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"X must be a non-empty matrix with at least one column, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    if np.unique(y).size < 2:
        raise ValueError("y must contain both classes")


def log_loss(X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float) -> float:
    """Mean negative log-likelihood, computed stably."""
    z = X @ weights + intercept
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def loss_gradient(X: np.ndarray, y: np.ndarray, weights: np.ndarray, intercept: float) -> tuple[np.ndarray, float]:
    """Analytic gradient of log_loss with respect to (weights, intercept)."""
    residual = expit(X @ weights + intercept) - y
    return X.T @ residual / X.shape[0], float(residual.mean())


def train_logistic(
    X: np.ndarray,
    y: np.ndarray,
    cfg: TrainConfig | None = None,
    seed: int | None = None,
    on_epoch: Callable[[int, float], None] | None = None,
) -> LrModel:
    """
    Fit logistic regression by full-batch gradient descent.

    Args:
        X: design matrix, one column per selected feature
        y: 0/1 labels with both classes present
        cfg: optimizer settings (defaults: lr 0.1, 100 epochs, tolerance 1e-4)
        seed: unused; training starts from zero weights and is deterministic
        on_epoch: called as on_epoch(epoch, loss) after every update

    Returns:
        LrModel: trained coefficients

    Raises:
        TrainingError: the loss became non-finite
    """
    cfg = cfg or TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_training_inputs(X, y)

    weights = np.zeros(X.shape[1])
    intercept = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(cfg.max_epochs):
            grad_w, grad_b = loss_gradient(X, y, weights, intercept)
            if max(np.abs(grad_w).max(), abs(grad_b)) < cfg.grad_tolerance:
                break
            weights = weights - cfg.learning_rate * grad_w
            intercept = intercept - cfg.learning_rate * grad_b
            if on_epoch is not None:
                on_epoch(epoch, log_loss(X, y, weights, intercept))

        loss = log_loss(X, y, weights, intercept)
    if not np.isfinite(loss) or not np.isfinite(weights).all() or not np.isfinite(intercept):
        raise TrainingError(f"non-finite training loss ({loss}); inputs are probably unscaled")
    return LrModel(weights, intercept)


def predict_proba_rows(m: LrModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.weights.size:
        raise ValueError(f"X has {X.shape[-1]} columns, model has {m.weights.size} weights")
    return expit(X @ m.weights + m.intercept)


def predict_proba(m: LrModel, x: Sequence[float] | np.ndarray) -> float:
    """sigmoid(w.x + intercept) for a single row."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != m.weights.shape:
        raise ValueError(f"x has length {x.size}, model has {m.weights.size} weights")
    return float(expit(x @ m.weights + m.intercept))


def confusion(m: LrModel, X: np.ndarray, y: np.ndarray, threshold: float = 0.5) -> ConfusionCounts:
    """Tally predictions; a probability equal to the threshold counts as positive."""
    predicted = predict_proba_rows(m, X) >= threshold
    actual = np.asarray(y).astype(bool)
    if actual.shape != predicted.shape:
        raise ValueError(f"y has {actual.size} rows, X has {predicted.size}")
    return ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fn=int(np.sum(~predicted & actual)),
        tn=int(np.sum(~predicted & ~actual)),
        fp=int(np.sum(predicted & ~actual)),
    )


def balanced_auc(c: ConfusionCounts) -> float:
    """(sensitivity + specificity) / 2."""
    if c.tp + c.fn == 0 or c.tn + c.fp == 0:
        raise ValueError(f"balanced AUC needs both classes among the evaluated rows, got {c}")
    return (c.sensitivity + c.specificity) / 2


def cardinality_score(mask: Sequence[bool] | np.ndarray) -> float:
    """popcount(mask) / len(mask)."""
    mask = np.asarray(mask, dtype=bool)
    count = int(mask.sum())
    if count == 0:
        raise ValueError("cardinality of an empty feature mask")
    return count / mask.size


def evaluate_solution(sol: Solution, shard: Shard, cfg: TrainConfig | None = None) -> Solution:
    """
    Train on the shard rows restricted to the solution's mask and record
    coefficients, balanced AUC and cardinality.
    """
    cfg = cfg or TrainConfig()
    try:
        X, y = project(shard, sol.bits)
        model = train_logistic(X, y, cfg)
    except (DatasetError, TrainingError) as e:
        raise EvaluationError(str(e), key=sol.key) from e
    auc = balanced_auc(confusion(model, X, y, cfg.threshold))
    return sol.evaluated(model, auc, cardinality_score(sol.bits))
