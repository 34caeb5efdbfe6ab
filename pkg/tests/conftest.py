from __future__ import annotations

import numpy as np
import pytest

from island_fss.classifier import LrModel
from island_fss.dataset import Dataset, Shard
from island_fss.mocore import Solution
from island_fss.synthetic import make_planted


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def planted_small() -> Dataset:
    """200 rows, 8 features, label decided by columns 0, 1 and 2."""
    return make_planted(n_rows=200, n_features=8, seed=7)


@pytest.fixture(scope="session")
def planted_shard(planted_small: Dataset) -> Shard:
    return Shard.whole(planted_small)


@pytest.fixture
def make_scored():
    """Build an evaluated solution from objective values alone (no training)."""

    def build(key: int, cardinality: float, auc: float, bits=None, test_auc: float | None = None) -> Solution:
        if bits is None:
            bits = np.zeros(10, dtype=bool)
            bits[: max(1, round(cardinality * 10))] = True
        bits = np.asarray(bits, dtype=bool)
        return Solution(
            key,
            bits,
            coefficients=LrModel(np.zeros(int(bits.sum())), 0.0),
            auc=auc,
            cardinality=cardinality,
            test_auc=test_auc,
        )

    return build


@pytest.fixture
def random_population(make_scored):
    """Random evaluated population with objective ties on a 0.05 grid."""

    def build(rng: np.random.Generator, size: int) -> list[Solution]:
        cards = np.round(rng.random(size) * 20) / 20
        aucs = np.round(rng.random(size) * 20) / 20
        return [make_scored(key, float(c), float(a)) for key, (c, a) in enumerate(zip(cards, aucs))]

    return build
