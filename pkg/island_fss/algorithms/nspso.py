"""
NSPSO generation kernel for one island.

Each particle carries a real-valued velocity and a personal best. The
velocity is pulled toward pbest and toward a global best drawn from the
least-crowded members of front 0, added to the current bits (scaled by the
constriction factor omega) and turned back into bits by a sigmoid transfer:
bit j is set iff a fresh uniform draw is below sigmoid(x_j).
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from island_fss.algorithms.operators import repair_mask
from island_fss.classifier import TrainConfig, evaluate_solution
from island_fss.dataset import Shard
from island_fss.mocore import FrontPartition, KeyAllocator, Solution, dominates, nondominated_sort, ns_select

logger = logging.getLogger(__name__)


class PsoParams(BaseModel):
    """Inertia, acceleration constants, constriction, velocity clamp and gbest pool fraction."""

    model_config = ConfigDict(frozen=True)

    w: float = Field(0.9, ge=0, le=1)
    c1: float = Field(0.4, gt=0)
    c2: float = Field(1.6, gt=0)
    omega: float = 1.0
    vmax: float = Field(4.0, gt=0)
    gbest_fraction: float = Field(0.05, gt=0, le=1)


@dataclass
class PsoState:
    """Per-particle velocities and personal bests, aligned with the population order."""

    velocities: np.ndarray
    pbest: list[Solution]
    gbest_pool: FrontPartition | None = None


def init_pso_state(local_p: Sequence[Solution]) -> PsoState:
    """Zero velocities; every particle is its own personal best."""
    n_features = local_p[0].n_features
    return PsoState(
        velocities=np.zeros((len(local_p), n_features)),
        pbest=list(local_p),
        gbest_pool=nondominated_sort(local_p),
    )


def _same_length(*vectors: np.ndarray) -> None:
    sizes = {v.size for v in vectors}
    if len(sizes) != 1:
        raise ValueError(f"vector lengths differ: {sorted(sizes)}")


def velocity_update(
    v: np.ndarray,
    p: np.ndarray,
    pbest: np.ndarray,
    gbest: np.ndarray,
    params: PsoParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """w*v + c1*r1*(pbest - p) + c2*r2*(gbest - p), clamped to [-vmax, vmax]."""
    v = np.asarray(v, dtype=np.float64)
    p, pbest, gbest = (np.asarray(a, dtype=np.float64) for a in (p, pbest, gbest))
    _same_length(v, p, pbest, gbest)
    # r1, r2 are drawn once per particle, not per dimension
    r1, r2 = rng.random(2)
    updated = params.w * v + params.c1 * r1 * (pbest - p) + params.c2 * r2 * (gbest - p)
    return np.clip(updated, -params.vmax, params.vmax)


def position_update(p: np.ndarray, v: np.ndarray, omega: float) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    _same_length(p, v)
    return p + omega * v


def binarize(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return rng.random(x.size) < expit(x)


def select_gbest(
    partition: FrontPartition,
    pop: Sequence[Solution],
    rng: np.random.Generator,
    fraction: float = 0.05,
) -> Solution:
    """Uniform draw among the top ceil(fraction * |front 0|) members of front 0 by crowding."""
    front = partition.first
    if not front:
        raise ValueError("gbest selection needs a non-empty front 0")
    pool_size = max(1, math.ceil(fraction * len(front) - 1e-9))
    key = front[int(rng.integers(pool_size))]
    return next(s for s in pop if s.key == key)


def update_pbest(old: Solution, candidate: Solution, rng: np.random.Generator) -> Solution:
    """The dominating one; a fair coin between mutually non-dominated solutions."""
    if dominates(candidate.objectives, old.objectives):
        return candidate
    if dominates(old.objectives, candidate.objectives):
        return old
    return candidate if rng.random() < 0.5 else old


def nspso_generation(
    local_p: Sequence[Solution],
    state: PsoState,
    params: PsoParams,
    shard: Shard,
    cfg: TrainConfig,
    rng: np.random.Generator,
    keys: KeyAllocator | None = None,
) -> tuple[list[Solution], PsoState]:
    """
    One generation: move every particle, evaluate the new positions, update
    pbest, then reduce parents plus offspring to len(local_p) with ns_select.

    A parent and its offspring share the particle's slot; survivors carry the
    slot's updated velocity and pbest forward.
    """
    n = len(local_p)
    if state.velocities.shape[0] != n or len(state.pbest) != n:
        raise ValueError(f"PSO state sized for {state.velocities.shape[0]} particles, population has {n}")
    keys = keys or KeyAllocator.after([*local_p, *state.pbest])
    # the pool holds keys of local_p
    partition = state.gbest_pool if state.gbest_pool is not None else nondominated_sort(local_p)

    velocities = np.empty_like(state.velocities)
    pbest = list(state.pbest)
    slot_of: dict[int, int] = {}
    offspring = []
    for i, particle in enumerate(local_p):
        gbest = select_gbest(partition, local_p, rng, params.gbest_fraction)
        velocities[i] = velocity_update(state.velocities[i], particle.bits, pbest[i].bits, gbest.bits, params, rng)
        position = position_update(particle.bits, velocities[i], params.omega)
        bits = repair_mask(binarize(position, rng), rng)
        child = evaluate_solution(Solution(keys(), bits), shard, cfg)
        pbest[i] = update_pbest(pbest[i], child, rng)
        slot_of[particle.key] = i
        slot_of[child.key] = i
        offspring.append(child)

    survivors = ns_select([*local_p, *offspring], n)
    slots = [slot_of[s.key] for s in survivors]
    next_state = PsoState(
        velocities=velocities[slots],
        pbest=[pbest[j] for j in slots],
        gbest_pool=nondominated_sort(survivors),
    )
    return survivors, next_state
