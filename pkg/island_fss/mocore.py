"""
Bi-objective kernel shared by every algorithm and by the migration rule.

Objectives are cardinality (minimized) and balanced AUC (maximized). This
module provides dominance, fast non-dominated sorting, crowding distance
and non-dominated-sorting truncation (ns_select). All orderings are
deterministic: descending crowding, then ascending key.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, NamedTuple

import numpy as np

if TYPE_CHECKING:
    from island_fss.classifier import LrModel


class ObjectivePair(NamedTuple):
    """(cardinality, auc): minimize the first, maximize the second."""

    cardinality: float
    auc: float

    @property
    def image(self) -> tuple[float, float]:
        """Minimization image (cardinality, 1 - auc)."""
        return (self.cardinality, 1.0 - self.auc)


@dataclass(frozen=True, eq=False)
class Solution:
    """
    One candidate feature mask and its evaluation record.

    `selected` is always derived from `bits`. Evaluation fields stay None
    until the mask has been scored on a shard; `test_auc` is filled by the
    test phase.
    """

    key: int
    bits: np.ndarray
    coefficients: LrModel | None = None
    auc: float | None = None
    cardinality: float | None = None
    test_auc: float | None = None
    selected: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        bits = np.array(self.bits, dtype=bool)
        if bits.ndim != 1:
            raise ValueError("bits must be a vector")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)
        object.__setattr__(self, "selected", tuple(int(j) for j in np.flatnonzero(bits)))

    @property
    def n_features(self) -> int:
        return int(self.bits.size)

    @property
    def popcount(self) -> int:
        return len(self.selected)

    @property
    def is_evaluated(self) -> bool:
        return self.coefficients is not None and self.auc is not None and self.cardinality is not None

    @property
    def objectives(self) -> ObjectivePair:
        if self.auc is None or self.cardinality is None:
            raise ValueError(f"solution {self.key} has not been evaluated")
        return ObjectivePair(self.cardinality, self.auc)

    def with_key(self, key: int) -> Solution:
        return replace(self, key=key)

    def evaluated(self, coefficients: LrModel, auc: float, cardinality: float) -> Solution:
        return replace(self, coefficients=coefficients, auc=auc, cardinality=cardinality)

    def with_test_auc(self, test_auc: float) -> Solution:
        return replace(self, test_auc=test_auc)

    def mask_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)


class KeyAllocator:
    """Hands out fresh, increasing solution keys."""

    def __init__(self, start: int = 0):
        self._next = start

    @classmethod
    def after(cls, pop: Iterable[Solution]) -> KeyAllocator:
        return cls(max((s.key for s in pop), default=-1) + 1)

    def __call__(self) -> int:
        key = self._next
        self._next += 1
        return key


@dataclass
class FrontPartition:
    """
    Population split into ordered non-dominated fronts.

    fronts[0] is the best front; each front lists keys by descending
    crowding, ties by ascending key.
    """

    fronts: list[list[int]]
    crowding: dict[int, float]

    @property
    def first(self) -> list[int]:
        return self.fronts[0] if self.fronts else []

    def rank_of(self, key: int) -> int:
        for rank, front in enumerate(self.fronts):
            if key in front:
                return rank
        raise KeyError(key)


def dominates(a: ObjectivePair, b: ObjectivePair) -> bool:
    """True iff a is no worse than b in both objectives and strictly better in one."""
    return (
        a.cardinality <= b.cardinality
        and a.auc >= b.auc
        and (a.cardinality < b.cardinality or a.auc > b.auc)
    )


def dominance_matrix(points: Sequence[ObjectivePair]) -> np.ndarray:
    """matrix[i, j] is True iff points[i] dominates points[j]."""
    values = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    card, auc = values[:, 0], values[:, 1]
    no_worse = (card[:, None] <= card[None, :]) & (auc[:, None] >= auc[None, :])
    better = (card[:, None] < card[None, :]) | (auc[:, None] > auc[None, :])
    return no_worse & better


def crowding_distances(front: Sequence[ObjectivePair], keys: Sequence[int] | None = None) -> np.ndarray:
    """
    Crowding distance of every member of a front.

    Per objective the members are sorted ascending (ties by key), the two
    endpoints get +inf and interior members get (next - previous) / (max - min);
    a constant objective contributes 0. The result is the sum over both
    objectives.
    """
    size = len(front)
    if size == 0:
        raise ValueError("crowding distance of an empty front")
    if size <= 2:
        return np.full(size, math.inf)

    values = np.asarray(front, dtype=np.float64).reshape(-1, 2)
    tiebreak = np.arange(size) if keys is None else np.asarray(keys)
    distance = np.zeros(size)
    for column in values.T:
        order = np.lexsort((tiebreak, column))
        ordered = column[order]
        span = ordered[-1] - ordered[0]
        distance[order[0]] = math.inf
        distance[order[-1]] = math.inf
        if span > 0:
            distance[order[1:-1]] += (ordered[2:] - ordered[:-2]) / span
    return distance


def nondominated_sort(pop: Sequence[Solution]) -> FrontPartition:
    """Peel the population into non-dominated fronts and compute crowding per front."""
    keys = [s.key for s in pop]
    if len(set(keys)) != len(keys):
        raise ValueError("solution keys must be unique within a population")
    unevaluated = [s.key for s in pop if s.auc is None or s.cardinality is None]
    if unevaluated:
        raise ValueError(f"unevaluated solutions present: {unevaluated[:5]}")
    if not pop:
        return FrontPartition([], {})

    points = [s.objectives for s in pop]
    dominated_by = dominance_matrix(points)
    counts = dominated_by.sum(axis=0)
    remaining = np.ones(len(pop), dtype=bool)

    fronts: list[list[int]] = []
    crowding: dict[int, float] = {}
    while remaining.any():
        members = np.flatnonzero(remaining & (counts == 0))
        remaining[members] = False
        counts = counts - dominated_by[members].sum(axis=0)

        member_keys = [keys[i] for i in members]
        distances = crowding_distances([points[i] for i in members], member_keys)
        for key, d in zip(member_keys, distances):
            crowding[key] = float(d)
        fronts.append(sorted(member_keys, key=lambda k: (-crowding[k], k)))

    return FrontPartition(fronts, crowding)


def first_front(pop: Sequence[Solution]) -> list[Solution]:
    """Members of front 0, in partition order."""
    by_key = {s.key: s for s in pop}
    return [by_key[k] for k in nondominated_sort(pop).first]


def ns_select(pop: Sequence[Solution], n: int) -> list[Solution]:
    """
    Keep n solutions: whole fronts from the best upward, the overflowing
    front truncated by descending crowding (ties by ascending key).
    """
    if n > len(pop):
        raise ValueError(f"cannot select {n} solutions from a population of {len(pop)}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")

    by_key = {s.key: s for s in pop}
    chosen: list[Solution] = []
    for front in nondominated_sort(pop).fronts:
        if len(chosen) == n:
            break
        chosen.extend(by_key[k] for k in front[: n - len(chosen)])
    return chosen
