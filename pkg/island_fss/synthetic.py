"""Seeded planted-subset datasets: a few informative columns decide the label, the rest are noise."""

import logging
from collections.abc import Sequence

import numpy as np

from island_fss.dataset import Dataset

logger = logging.getLogger(__name__)


def make_planted(
    n_rows: int = 500,
    n_features: int = 20,
    informative: Sequence[int] = (0, 1, 2),
    coefficients: Sequence[float] = (1.0, 1.0, -2.0),
    noise: float = 0.05,
    margin: float = 0.1,
    seed: int = 0,
) -> Dataset:
    """
    Features are i.i.d. U(0, 1); the label is 1 iff
    sum(coefficients * x[informative]) + N(0, noise^2) > 0.

    Rows whose noiseless score lies within `margin` of zero are redrawn, so
    the informative subset separates the classes almost perfectly.
    """
    informative = np.asarray(informative, dtype=np.intp)
    coefficients = np.asarray(coefficients, dtype=np.float64)
    if informative.size != coefficients.size or informative.size == 0:
        raise ValueError("informative and coefficients must be non-empty and of equal length")
    if informative.min() < 0 or informative.max() >= n_features:
        raise ValueError(f"informative columns must lie in [0, {n_features})")
    if n_rows < 2:
        raise ValueError(f"n_rows must be at least 2, got {n_rows}")
    if margin < 0 or noise < 0:
        raise ValueError("margin and noise must be non-negative")

    rng = np.random.default_rng(seed)
    kept: list[np.ndarray] = []
    count = 0
    while count < n_rows:
        block = rng.random((n_rows, n_features))
        block = block[np.abs(block[:, informative] @ coefficients) >= margin]
        kept.append(block)
        count += block.shape[0]
    features = np.vstack(kept)[:n_rows]

    score = features[:, informative] @ coefficients
    labels = (score + rng.normal(0.0, noise, size=n_rows) > 0).astype(np.int8)
    logger.debug(f"Planted dataset: {n_rows} rows, {n_features} features, {int(labels.sum())} positives")
    return Dataset(
        features=features,
        labels=labels,
        feature_names=tuple(f"f{j}" for j in range(n_features)),
    )
