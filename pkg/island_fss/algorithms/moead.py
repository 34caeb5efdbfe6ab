"""
MOEA/D generation kernel for one island (Tchebycheff decomposition).

Objectives are handled in their minimization image (cardinality, 1 - auc).
Each population index owns a weight vector and a neighborhood of the T
closest weight vectors; an offspring replaces every neighbor whose
Tchebycheff value it matches or improves. The external population (EP) keeps
the non-dominated solutions found so far.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

from island_fss.algorithms.operators import GaParams, mutate_bits, one_point_crossover, repair_mask
from island_fss.classifier import TrainConfig, evaluate_solution
from island_fss.dataset import Shard
from island_fss.mocore import KeyAllocator, ObjectivePair, Solution, first_front, ns_select

logger = logging.getLogger(__name__)


@dataclass
class MoeadState:
    """Weight vectors, neighborhoods, ideal point z* and the external archive."""

    weights: np.ndarray
    neighborhoods: np.ndarray
    ideal: np.ndarray
    archive: list[Solution]
    t_size: int


def uniform_weights(n: int) -> np.ndarray:
    """n evenly spaced 2-D weight vectors (i/(n-1), 1 - i/(n-1))."""
    if n < 2:
        raise ValueError(f"at least 2 weight vectors are needed, got {n}")
    first = np.arange(n) / (n - 1)
    return np.column_stack([first, 1.0 - first])


def neighborhoods(weights: np.ndarray, t: int) -> np.ndarray:
    """For every weight vector, the indices of its t nearest weight vectors (self included)."""
    n = len(weights)
    if not 1 <= t <= n:
        raise ValueError(f"neighborhood size must be in [1, {n}], got {t}")
    distances = cdist(weights, weights)
    indices = np.arange(n)
    return np.array([np.lexsort((indices, row))[:t] for row in distances])


def tchebycheff(f: ObjectivePair, lam: Sequence[float] | np.ndarray, ideal: Sequence[float] | np.ndarray) -> float:
    """max_i lam_i * |f_i - z*_i| over the minimization image of f."""
    image = np.asarray(f.image)
    return float(np.max(np.asarray(lam) * np.abs(image - np.asarray(ideal))))


def update_ideal(ideal: np.ndarray, f: ObjectivePair) -> np.ndarray:
    return np.minimum(ideal, np.asarray(f.image))


def init_moead_state(local_p: Sequence[Solution], t: int) -> MoeadState:
    """Uniform weights, T-neighborhoods, z* from the evaluated population, EP = its front 0."""
    weights = uniform_weights(len(local_p))
    ideal = np.full(2, np.inf)
    for s in local_p:
        ideal = update_ideal(ideal, s.objectives)
    return MoeadState(
        weights=weights,
        neighborhoods=neighborhoods(weights, t),
        ideal=ideal,
        archive=_dedupe_masks(first_front(local_p)),
        t_size=t,
    )


def neighbor_update(
    pop: Sequence[Solution],
    idx: int,
    y: Solution,
    state: MoeadState,
    keys: KeyAllocator | None = None,
) -> list[Solution]:
    """Replace every neighbor j of idx with a copy of y when g(y|lam_j, z*) <= g(pop[j]|lam_j, z*)."""
    keys = keys or KeyAllocator.after([*pop, y])
    updated = list(pop)
    for j in state.neighborhoods[idx]:
        lam = state.weights[j]
        if tchebycheff(y.objectives, lam, state.ideal) <= tchebycheff(updated[j].objectives, lam, state.ideal):
            updated[j] = y.with_key(keys())
    return updated


def _dedupe_masks(solutions: Sequence[Solution]) -> list[Solution]:
    seen: set[bytes] = set()
    unique = []
    for s in sorted(solutions, key=lambda s: s.key):
        fingerprint = np.packbits(s.bits).tobytes()
        if fingerprint not in seen:
            seen.add(fingerprint)
            unique.append(s)
    return unique


def _archive_union(archive: Sequence[Solution], pop: Sequence[Solution]) -> list[Solution]:
    # archive members may still be present in the population under the same key
    archive_keys = {s.key for s in archive}
    return [*archive, *(s for s in pop if s.key not in archive_keys)]


def moead_generation(
    local_p: Sequence[Solution],
    state: MoeadState,
    params: GaParams,
    shard: Shard,
    cfg: TrainConfig,
    rng: np.random.Generator,
    keys: KeyAllocator | None = None,
) -> tuple[list[Solution], MoeadState]:
    """
    One generation over every subproblem i: two distinct parents from the
    neighborhood of i, crossover and mutation, evaluate the first child y,
    update z*, neighborhood replacement with y. The archive then becomes the
    non-dominated members of EP plus the population, truncated to
    len(local_p) by ns_select.
    """
    n = len(local_p)
    keys = keys or KeyAllocator.after([*local_p, *state.archive])
    pop = list(local_p)

    for i in range(n):
        neighborhood = state.neighborhoods[i]
        if neighborhood.size >= 2:
            a, b = rng.choice(neighborhood, size=2, replace=False)
        else:
            a = b = neighborhood[0]
        c1, c2 = one_point_crossover(pop[a].bits, pop[b].bits, params.pc, rng)
        c1 = repair_mask(mutate_bits(c1, params.pm, rng), rng)
        # the second child is mutated too but only the first is evaluated
        repair_mask(mutate_bits(c2, params.pm, rng), rng)

        y = evaluate_solution(Solution(keys(), c1), shard, cfg)
        state = replace(state, ideal=update_ideal(state.ideal, y.objectives))
        pop = neighbor_update(pop, i, y, state, keys)

    front = first_front(_archive_union(state.archive, pop))
    archive = _dedupe_masks(front)
    if len(archive) < len(front):
        logger.debug(f"EP: dropped {len(front) - len(archive)} duplicate masks")
    if len(archive) > n:
        archive = ns_select(archive, n)
    return pop, replace(state, archive=archive)


def island_output(pop: Sequence[Solution], state: MoeadState, size: int) -> list[Solution]:
    """The archive, topped up from the working population when it holds fewer than `size` members."""
    return ns_select(_archive_union(state.archive, pop), size)
