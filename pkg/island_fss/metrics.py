"""
Quality indicators and statistics over completed runs.

All indicators work on (cardinality, auc) pairs in [0, 1]. The hypervolume
reference point is the worst possible solution: every feature selected and
AUC 0, i.e. (1, 1) in the minimization image (cardinality, 1 - auc), so the
value is already normalized to [0, 1].
"""

import logging
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any, Literal

import numpy as np
from scipy.special import betainc

from island_fss.engine import RunReport
from island_fss.mocore import ObjectivePair, Solution, dominance_matrix

logger = logging.getLogger(__name__)

AucSource = Literal["train", "test"]

AUC_TOLERANCE = 1e-9


def _auc_of(s: Solution, source: AucSource) -> float:
    auc = s.auc if source == "train" else s.test_auc
    if auc is None:
        raise ValueError(f"solution {s.key} has no {source} AUC")
    return auc


def _check_mutually_nondominated(points: Sequence[ObjectivePair]) -> None:
    if len(points) < 2:
        return
    dominated = dominance_matrix(points)
    if dominated.any():
        i, j = (int(v) for v in np.argwhere(dominated)[0])
        raise ValueError(f"front contains a dominated pair: {tuple(points[i])} dominates {tuple(points[j])}")


@dataclass(frozen=True)
class FrontSet:
    """Mutually non-dominated objective pairs produced by one run."""

    points: tuple[ObjectivePair, ...]
    run_id: int = 0

    def __post_init__(self):
        points = tuple(ObjectivePair(float(c), float(a)) for c, a in self.points)
        for p in points:
            if not (0.0 <= p.cardinality <= 1.0 and 0.0 <= p.auc <= 1.0):
                raise ValueError(f"objective pair outside [0, 1]: {tuple(p)}")
        _check_mutually_nondominated(points)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_population(cls, pop: Sequence[Solution], run_id: int = 0, auc_source: AucSource = "train") -> "FrontSet":
        """The non-dominated objective pairs of a population, duplicates removed, by ascending cardinality."""
        unique = sorted({ObjectivePair(s.cardinality, _auc_of(s, auc_source)) for s in pop})
        if not unique:
            return cls((), run_id)
        dominated = dominance_matrix(unique).any(axis=0)
        return cls(tuple(p for p, d in zip(unique, dominated) if not d), run_id)


def hypervolume(front: FrontSet | Sequence[ObjectivePair]) -> float:
    """
    Area dominated by the front up to the reference image (1, 1).

    Raises:
        ValueError: the front contains a dominated pair
    """
    points = front.points if isinstance(front, FrontSet) else tuple(ObjectivePair(*p) for p in front)
    points = sorted(set(points))
    _check_mutually_nondominated(points)
    if not points:
        return 0.0

    images = np.array([p.image for p in points])
    x, y = images[:, 0], images[:, 1]
    widths = np.append(x[1:], 1.0) - x
    return float(np.sum(widths * (1.0 - y)))


@dataclass(frozen=True)
class AttainmentSurfaces:
    """Best, median and worst attainment surfaces as staircase corners in (cardinality, auc)."""

    best: list[ObjectivePair]
    median: list[ObjectivePair]
    worst: list[ObjectivePair]
    runs: int

    def levels(self) -> dict[str, list[ObjectivePair]]:
        return {"best": self.best, "median": self.median, "worst": self.worst}


def _surface(per_run: list[list[ObjectivePair]], candidates: np.ndarray, t: int) -> list[ObjectivePair]:
    # best AUC each run attains at cardinality <= c, for every candidate c
    best = np.full((len(per_run), candidates.size), -np.inf)
    for r, points in enumerate(per_run):
        for p in points:
            reach = candidates >= p.cardinality
            best[r, reach] = np.maximum(best[r, reach], p.auc)
    # t-th largest over runs
    level = -np.sort(-best, axis=0)[t - 1]

    corners: list[ObjectivePair] = []
    for c, auc in zip(candidates, level):
        if np.isfinite(auc) and (not corners or auc > corners[-1].auc):
            corners.append(ObjectivePair(float(c), float(auc)))
    return corners


def eaf(fronts: Sequence[FrontSet]) -> AttainmentSurfaces:
    """
    Empirical attainment surfaces of R runs.

    A point is attained at level t when at least t fronts weakly dominate it.
    The best surface is level 1, the median level ceil(R/2), the worst level R.
    """
    if not fronts:
        raise ValueError("eaf needs at least one front")
    per_run = [list(f.points) for f in fronts]
    candidates = np.unique([p.cardinality for points in per_run for p in points])
    runs = len(fronts)
    return AttainmentSurfaces(
        best=_surface(per_run, candidates, 1),
        median=_surface(per_run, candidates, math.ceil(runs / 2)),
        worst=_surface(per_run, candidates, runs),
        runs=runs,
    )


def attained(surface: Sequence[ObjectivePair], point: ObjectivePair) -> bool:
    """Whether some corner of the surface weakly dominates the point."""
    return any(c.cardinality <= point.cardinality and c.auc >= point.auc for c in surface)


def attainment_level(fronts: Sequence[FrontSet], point: ObjectivePair) -> float:
    """Fraction of runs whose front weakly dominates the point."""
    if not fronts:
        raise ValueError("attainment level of an empty collection of fronts")
    return sum(attained(f.points, point) for f in fronts) / len(fronts)


def speedup(t_sequential: float, t_parallel: float) -> float:
    """Sequential wall time divided by parallel wall time."""
    if t_sequential <= 0 or t_parallel <= 0:
        raise ValueError(f"times must be positive, got {t_sequential} and {t_parallel}")
    return t_sequential / t_parallel


@dataclass(frozen=True)
class StatResult:
    t_statistic: float
    p_value: float
    reject: bool
    dof: int


def t_test_pooled(a: Sequence[float], b: Sequence[float], alpha: float = 0.05) -> StatResult:
    """
    Two-sample t-test with pooled variance and a two-sided p-value.

    Zero pooled variance gives t = 0, p = 1 for equal means and t = +-inf,
    p = 0 otherwise.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError(f"both samples need at least 2 values, got {a.size} and {b.size}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")

    dof = a.size + b.size - 2
    pooled = ((a.size - 1) * a.var(ddof=1) + (b.size - 1) * b.var(ddof=1)) / dof
    standard_error = math.sqrt(pooled * (1 / a.size + 1 / b.size))
    diff = float(a.mean() - b.mean())

    if standard_error == 0.0:
        if diff == 0.0:
            t, p = 0.0, 1.0
        else:
            t, p = math.copysign(math.inf, diff), 0.0
    else:
        t = diff / standard_error
        p = float(betainc(dof / 2, 0.5, dof / (dof + t * t)))
    return StatResult(t_statistic=t, p_value=p, reject=p < alpha, dof=dof)


def _sig6(value: Any) -> Any:
    if isinstance(value, float) and math.isfinite(value):
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {k: _sig6(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sig6(v) for v in value]
    return value


@dataclass
class Summary:
    """Aggregate of a batch of runs of one algorithm on one dataset."""

    algorithm: str
    runs: int
    auc_source: AucSource
    hv_source: AucSource

    # top-AUC solution of every run
    mean_cardinality_count: float
    mean_cardinality: float
    mean_auc: float

    modal_subset: tuple[int, ...]
    modal_count: int
    modal_cardinality: float
    modal_auc: float

    least_cardinal_subset: tuple[int, ...]
    least_cardinal_cardinality: float
    least_cardinal_auc: float
    least_cardinal_run: int

    mean_hv: float
    hv_per_run: list[float] = field(default_factory=list)
    wall_times: list[dict[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready record, floats rounded to 6 significant digits."""
        return _sig6(asdict(self))


def _top_solution(pop: Sequence[Solution], source: AucSource) -> Solution:
    return min(pop, key=lambda s: (-_auc_of(s, source), s.cardinality, s.key))


def summarize(
    reports: Sequence[RunReport],
    auc_source: AucSource = "test",
    hv_source: AucSource = "train",
) -> Summary:
    """
    Summarize repeated runs.

    Args:
        reports: one RunReport per seeded run
        auc_source: which AUC ranks and reports the top solutions
        hv_source: which AUC the per-run hypervolume is computed with

    Returns:
        Summary: means over the per-run top-AUC solutions, the most repeated
        top subset, the least-cardinal subset reaching the overall maximum
        AUC, and per-run hypervolume
    """
    if not reports:
        raise ValueError("summarize needs at least one run report")

    tops = [_top_solution(r.final_population, auc_source) for r in reports]

    occurrences: dict[tuple[int, ...], list[Solution]] = {}
    for s in tops:
        occurrences.setdefault(s.selected, []).append(s)
    counts = Counter({subset: len(members) for subset, members in occurrences.items()})

    def modal_rank(subset: tuple[int, ...]):
        members = occurrences[subset]
        mean_auc = float(np.mean([_auc_of(s, auc_source) for s in members]))
        return (-counts[subset], -mean_auc, members[0].cardinality, subset)

    modal = min(counts, key=modal_rank)
    modal_members = occurrences[modal]

    everything = [(run, s) for run, r in enumerate(reports) for s in r.final_population]
    best_auc = max(_auc_of(s, auc_source) for _, s in everything)
    contenders = [(run, s) for run, s in everything if _auc_of(s, auc_source) >= best_auc - AUC_TOLERANCE]
    least_run, least = min(contenders, key=lambda rs: (rs[1].popcount, rs[0], rs[1].key))

    hv_per_run = [
        hypervolume(FrontSet.from_population(r.final_population, run, hv_source)) for run, r in enumerate(reports)
    ]

    summary = Summary(
        algorithm=reports[0].algorithm,
        runs=len(reports),
        auc_source=auc_source,
        hv_source=hv_source,
        mean_cardinality_count=float(np.mean([s.popcount for s in tops])),
        mean_cardinality=float(np.mean([s.cardinality for s in tops])),
        mean_auc=float(np.mean([_auc_of(s, auc_source) for s in tops])),
        modal_subset=modal,
        modal_count=counts[modal],
        modal_cardinality=modal_members[0].cardinality,
        modal_auc=float(np.mean([_auc_of(s, auc_source) for s in modal_members])),
        least_cardinal_subset=least.selected,
        least_cardinal_cardinality=least.cardinality,
        least_cardinal_auc=_auc_of(least, auc_source),
        least_cardinal_run=least_run,
        mean_hv=float(np.mean(hv_per_run)),
        hv_per_run=hv_per_run,
        wall_times=[dict(r.wall_times) for r in reports],
    )
    logger.debug(f"Summary over {summary.runs} runs: mean AUC {summary.mean_auc:.4f}, mean HV {summary.mean_hv:.4f}")
    return summary
