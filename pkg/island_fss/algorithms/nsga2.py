"""NSGA-II generation kernel for one island."""

import logging
from collections.abc import Sequence

import numpy as np

from island_fss.algorithms.operators import GaParams, mutate_bits, one_point_crossover, repair_mask
from island_fss.classifier import TrainConfig, evaluate_solution
from island_fss.dataset import Shard
from island_fss.mocore import KeyAllocator, Solution, ns_select

logger = logging.getLogger(__name__)


def nsga2_generation(
    local_p: Sequence[Solution],
    params: GaParams,
    shard: Shard,
    cfg: TrainConfig,
    rng: np.random.Generator,
    keys: KeyAllocator | None = None,
) -> list[Solution]:
    """
    One generation: shuffle-pair the parents, one-point crossover, bit-flip
    mutation, repair and evaluate the offspring, then reduce parents plus
    offspring back to len(local_p) with ns_select.
    """
    n = len(local_p)
    keys = keys or KeyAllocator.after(local_p)
    order = rng.permutation(n)

    children: list[np.ndarray] = []
    for i in range(0, n, 2):
        a = order[i]
        # odd population: the last parent mates with a random other parent
        b = order[i + 1] if i + 1 < n else order[rng.integers(n - 1)]
        children.extend(one_point_crossover(local_p[a].bits, local_p[b].bits, params.pc, rng))

    offspring = []
    for bits in children[:n]:
        bits = repair_mask(mutate_bits(bits, params.pm, rng), rng)
        offspring.append(evaluate_solution(Solution(keys(), bits), shard, cfg))

    return ns_select([*local_p, *offspring], n)
