"""
Island-model driver.

Stage I initializes the global population and shards the training rows into
k data islands. Each migration round draws k overlapped sub-populations,
evolves them in parallel (one joblib task per island) and merges them at a
barrier with the non-dominated-sorting migration rule. Stage III scores the
final population on the test split with the stored coefficients.

Every island draws from its own child stream of the master seed, so a run is
reproducible regardless of how the workers are scheduled.
"""

import logging
import time
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from joblib import Parallel, delayed
from pydantic_settings import BaseSettings, SettingsConfigDict

from island_fss.algorithms import (
    GaParams,
    PsoParams,
    init_moead_state,
    init_pso_state,
    island_output,
    moead_generation,
    nsga2_generation,
    nspso_generation,
    repair_mask,
)
from island_fss.classifier import TrainConfig, balanced_auc, confusion, evaluate_solution
from island_fss.dataset import Dataset, Shard, project, shard_rows
from island_fss.errors import DatasetError, EvaluationError, MigrationError
from island_fss.mocore import KeyAllocator, ObjectivePair, Solution, first_front, ns_select

logger = logging.getLogger(__name__)

Algorithm = Literal["nsga2", "nspso", "moead"]


class EngineConfig(BaseSettings):
    """
    Engine settings.

    Every field can be set from the environment with the ISLAND_FSS_ prefix;
    nested parameter groups use "__" (ISLAND_FSS_GA__PC=0.9).
    """

    model_config = SettingsConfigDict(env_prefix="ISLAND_FSS_", env_nested_delimiter="__")

    algorithm: Algorithm = "nsga2"
    n: int = 20
    local_n: int | None = None
    k: int = 4
    m_gen: int = 10
    m_mig: int = 1
    seed: int = 0

    ga: GaParams = GaParams()
    pso: PsoParams = PsoParams()
    moead_t: int | None = None
    train: TrainConfig = TrainConfig()

    reevaluate_on_migrate: bool = False
    runs: int = 20

    # sequential-baseline mode runs the islands one after another in-process
    parallel: bool = True
    n_jobs: int | None = None

    def model_post_init(self, __context):
        """Fill derived defaults, then check the cross-field invariants."""
        if self.local_n is None:
            self.local_n = self.n // 2
        if self.moead_t is None:
            self.moead_t = min(5, self.local_n)

        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 2 <= self.local_n <= self.n:
            raise ValueError(f"local_n must be in [2, n={self.n}], got {self.local_n}")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.m_gen < 1:
            raise ValueError(f"m_gen must be at least 1, got {self.m_gen}")
        if self.m_mig < 1:
            raise ValueError(f"m_mig must be at least 1, got {self.m_mig}")
        if self.k * self.local_n < self.n:
            raise ValueError(
                f"k * local_n = {self.k * self.local_n} is smaller than n = {self.n}; migration cannot refill the population"
            )
        if not 1 <= self.moead_t <= self.local_n:
            raise ValueError(f"moead_t must be in [1, local_n={self.local_n}], got {self.moead_t}")
        if self.runs < 1:
            raise ValueError(f"runs must be at least 1, got {self.runs}")
        if self.n_jobs is not None and self.n_jobs == 0:
            raise ValueError("n_jobs must not be 0")


@dataclass(frozen=True)
class MigrationRecord:
    """What one barrier saw and kept."""

    index: int
    pooled_size: int
    pooled_front0_size: int
    pooled_max_auc: float
    pooled_min_cardinality: float
    migrated_max_auc: float
    migrated_min_cardinality: float
    migrated_front0: list[ObjectivePair]
    island_front0: list[list[ObjectivePair]]


@dataclass
class RunReport:
    final_population: list[Solution]
    per_migration_fronts: list[list[Solution]]
    wall_times: dict[str, float]
    seed: int
    algorithm: Algorithm = "nsga2"
    history: list[MigrationRecord] = field(default_factory=list)


def coordinator_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))


def island_rng(seed: int, migration: int, island: int) -> np.random.Generator:
    """Child stream for one island in one migration round."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, migration, island)))


def shard_seed(seed: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(2,))


def init_population(n: int, n_features: int, rng: np.random.Generator) -> list[Solution]:
    """n fair-coin masks with keys 0..n-1; an all-zero draw gets one random bit."""
    if n < 2:
        raise ValueError(f"population size must be at least 2, got {n}")
    if n_features < 1:
        raise ValueError(f"n_features must be at least 1, got {n_features}")
    bits = rng.random((n, n_features)) < 0.5
    return [Solution(key, repair_mask(row, rng)) for key, row in enumerate(bits)]


def draw_subpopulations(
    pop: Sequence[Solution], k: int, local_n: int, rng: np.random.Generator
) -> list[list[Solution]]:
    """
    k independent draws of local_n solutions, each without replacement.

    Islands may share solutions with each other (overlapped sub-populations);
    every island receives its own copies.
    """
    if local_n > len(pop):
        raise ValueError(f"cannot draw {local_n} solutions from a population of {len(pop)}")
    subpops = []
    for _ in range(k):
        picked = rng.choice(len(pop), size=local_n, replace=False)
        subpops.append([replace(pop[i]) for i in picked])
    return subpops


def _summary(pop: Sequence[Solution]) -> str:
    return (
        f"max AUC {max(s.auc for s in pop):.4f}, "
        f"min cardinality {min(s.cardinality for s in pop):.4f}"
    )


def run_island(
    algorithm: Algorithm,
    subpop: Sequence[Solution],
    shard: Shard,
    cfg: EngineConfig,
    rng: np.random.Generator,
    island: int = 0,
) -> list[Solution]:
    """
    Evaluate the received sub-population on the island's shard, then run the
    algorithm's generation kernel m_gen times.

    Returns:
        list[Solution]: exactly local_n evaluated solutions

    Raises:
        EvaluationError: tagged with the island index
    """
    keys = KeyAllocator.after(subpop)
    try:
        pop = [evaluate_solution(s, shard, cfg.train) for s in subpop]
        logger.debug(f"Island {island}: evaluated {len(pop)} received solutions, {_summary(pop)}")

        if algorithm == "nsga2":
            for generation in range(cfg.m_gen):
                pop = nsga2_generation(pop, cfg.ga, shard, cfg.train, rng, keys)
                logger.debug(f"Island {island} generation {generation + 1}/{cfg.m_gen}: {_summary(pop)}")
        elif algorithm == "nspso":
            state = init_pso_state(pop)
            for generation in range(cfg.m_gen):
                pop, state = nspso_generation(pop, state, cfg.pso, shard, cfg.train, rng, keys)
                logger.debug(f"Island {island} generation {generation + 1}/{cfg.m_gen}: {_summary(pop)}")
        elif algorithm == "moead":
            state = init_moead_state(pop, cfg.moead_t)
            for generation in range(cfg.m_gen):
                pop, state = moead_generation(pop, state, cfg.ga, shard, cfg.train, rng, keys)
                logger.debug(
                    f"Island {island} generation {generation + 1}/{cfg.m_gen}: {_summary(pop)}, EP {len(state.archive)}"
                )
            pop = island_output(pop, state, cfg.local_n)
        else:
            raise ValueError(f"unknown algorithm: {algorithm}")
    except EvaluationError as e:
        e.island = island
        raise
    return pop


def pool_islands(
    evolved: Sequence[Sequence[Solution]],
    reevaluate_on: Dataset | None = None,
    train_cfg: TrainConfig | None = None,
) -> list[Solution]:
    """
    Collect every island's output in island order, then key order, and
    renumber the keys 0.. in that order. With `reevaluate_on`, every pooled
    solution is retrained and rescored on that dataset.
    """
    pooled = []
    for island_pop in evolved:
        pooled.extend(sorted(island_pop, key=lambda s: s.key))
    pooled = [s.with_key(key) for key, s in enumerate(pooled)]

    if reevaluate_on is not None:
        whole = Shard.whole(reevaluate_on)
        pooled = [evaluate_solution(s, whole, train_cfg) for s in pooled]
    return pooled


def select_migrants(pooled: Sequence[Solution], n: int) -> list[Solution]:
    if len(pooled) < n:
        raise MigrationError(f"migration received {len(pooled)} candidates, needs at least {n}")
    return ns_select(pooled, n)


def migrate(
    evolved: Sequence[Sequence[Solution]],
    n: int,
    reevaluate_on: Dataset | None = None,
    train_cfg: TrainConfig | None = None,
) -> list[Solution]:
    """
    Non-dominated-sorting migration rule: pool, sort into fronts, order each
    front by crowding and keep the top n as the next global population.
    """
    return select_migrants(pool_islands(evolved, reevaluate_on, train_cfg), n)


def test_phase(pop: Sequence[Solution], test: Dataset, threshold: float = 0.5) -> list[Solution]:
    """
    Score every solution on the test rows with its stored coefficients (no retraining).

    Raises:
        ValueError: a solution has no coefficients, or they do not fit its mask
    """
    whole = Shard.whole(test)
    scored = []
    for s in pop:
        if s.coefficients is None:
            raise ValueError(f"solution {s.key} has no trained coefficients")
        if s.coefficients.weights.size != s.popcount:
            raise ValueError(
                f"solution {s.key}: {s.coefficients.weights.size} coefficients for {s.popcount} selected features"
            )
        X, y = project(whole, s.bits)
        scored.append(s.with_test_auc(balanced_auc(confusion(s.coefficients, X, y, threshold))))
    return scored


def _dispatch(
    cfg: EngineConfig,
    subpops: list[list[Solution]],
    shards: list[Shard],
    migration: int,
) -> list[list[Solution]]:
    rngs = [island_rng(cfg.seed, migration, i) for i in range(cfg.k)]
    if cfg.parallel and cfg.k > 1:
        return Parallel(n_jobs=cfg.n_jobs or cfg.k)(
            delayed(run_island)(cfg.algorithm, subpops[i], shards[i], cfg, rngs[i], i) for i in range(cfg.k)
        )
    return [run_island(cfg.algorithm, subpops[i], shards[i], cfg, rngs[i], i) for i in range(cfg.k)]


def _record(index: int, pooled: list[Solution], migrated: list[Solution], evolved: list[list[Solution]]) -> MigrationRecord:
    return MigrationRecord(
        index=index,
        pooled_size=len(pooled),
        pooled_front0_size=len(first_front(pooled)),
        pooled_max_auc=max(s.auc for s in pooled),
        pooled_min_cardinality=min(s.cardinality for s in pooled),
        migrated_max_auc=max(s.auc for s in migrated),
        migrated_min_cardinality=min(s.cardinality for s in migrated),
        migrated_front0=[s.objectives for s in first_front(migrated)],
        island_front0=[[s.objectives for s in first_front(island_pop)] for island_pop in evolved],
    )


def run(cfg: EngineConfig, train: Dataset, test: Dataset) -> RunReport:
    """
    One complete run: initialization, m_mig migration rounds, test phase.

    Args:
        cfg: engine settings
        train: training split (scaling already attached)
        test: test split with the same columns

    Returns:
        RunReport: final population with train and test AUC, per-migration history and timings

    Raises:
        DatasetError: the splits disagree on the feature count or cannot be sharded
        EvaluationError: an island failed to score a solution
        MigrationError: a barrier received an incomplete round
    """
    if train.n_features != test.n_features:
        raise DatasetError(f"train has {train.n_features} features, test has {test.n_features}")

    started = time.perf_counter()
    wall_times = {"init": 0.0, "islands": 0.0, "migration": 0.0, "test": 0.0}

    rng = coordinator_rng(cfg.seed)
    shards = shard_rows(train, cfg.k, shard_seed(cfg.seed))
    population = init_population(cfg.n, train.n_features, rng)
    wall_times["init"] = time.perf_counter() - started
    logger.info(
        f"Run seed={cfg.seed}: {cfg.algorithm}, N={cfg.n}, localN={cfg.local_n}, k={cfg.k}, "
        f"mGen={cfg.m_gen}, mMig={cfg.m_mig}, {train.n_rows} train rows x {train.n_features} features"
    )

    fronts: list[list[Solution]] = []
    history: list[MigrationRecord] = []
    for migration in range(cfg.m_mig):
        phase = time.perf_counter()
        subpops = draw_subpopulations(population, cfg.k, cfg.local_n, rng)
        evolved = _dispatch(cfg, subpops, shards, migration)
        wall_times["islands"] += time.perf_counter() - phase

        # barrier: every island of this round has returned
        if len(evolved) != cfg.k:
            raise MigrationError(f"round {migration}: {len(evolved)} of {cfg.k} islands reported")
        for island, island_pop in enumerate(evolved):
            if len(island_pop) != cfg.local_n:
                raise MigrationError(
                    f"round {migration}: island {island} returned {len(island_pop)} solutions, expected {cfg.local_n}"
                )

        phase = time.perf_counter()
        pooled = pool_islands(evolved, train if cfg.reevaluate_on_migrate else None, cfg.train)
        population = select_migrants(pooled, cfg.n)
        record = _record(migration, pooled, population, evolved)
        history.append(record)
        fronts.append(first_front(population))
        wall_times["migration"] += time.perf_counter() - phase

        logger.info(
            f"Migration {migration + 1}/{cfg.m_mig}: pooled {record.pooled_size}, "
            f"front 0 {record.pooled_front0_size}, {_summary(population)}, "
            f"{time.perf_counter() - started:.2f}s elapsed"
        )

    phase = time.perf_counter()
    population = test_phase(population, test, cfg.train.threshold)
    wall_times["test"] = time.perf_counter() - phase
    wall_times["total"] = time.perf_counter() - started

    return RunReport(
        final_population=population,
        per_migration_fronts=fronts,
        wall_times=wall_times,
        seed=cfg.seed,
        algorithm=cfg.algorithm,
        history=history,
    )


def same_populations(a: Sequence[Solution], b: Sequence[Solution]) -> bool:
    """Key-for-key equality of masks, scores and coefficients."""
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if x.key != y.key or not np.array_equal(x.bits, y.bits):
            return False
        if (x.auc, x.cardinality, x.test_auc) != (y.auc, y.cardinality, y.test_auc):
            return False
        if (x.coefficients is None) != (y.coefficients is None):
            return False
        if x.coefficients is not None and (
            not np.array_equal(x.coefficients.weights, y.coefficients.weights)
            or x.coefficients.intercept != y.coefficients.intercept
        ):
            return False
    return True
