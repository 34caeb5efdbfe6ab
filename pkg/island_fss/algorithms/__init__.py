"""Per-island generation kernels: NSGA-II, NSPSO and MOEA/D."""

from island_fss.algorithms.moead import MoeadState, init_moead_state, island_output, moead_generation
from island_fss.algorithms.nsga2 import nsga2_generation
from island_fss.algorithms.nspso import PsoParams, PsoState, init_pso_state, nspso_generation
from island_fss.algorithms.operators import GaParams, mutate_bits, one_point_crossover, repair_mask

ALGORITHMS = ("nsga2", "nspso", "moead")

__all__ = [
    "ALGORITHMS",
    "GaParams",
    "MoeadState",
    "PsoParams",
    "PsoState",
    "init_moead_state",
    "init_pso_state",
    "island_output",
    "moead_generation",
    "mutate_bits",
    "nsga2_generation",
    "nspso_generation",
    "one_point_crossover",
    "repair_mask",
]
