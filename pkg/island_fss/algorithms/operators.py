"""
Variation operators on binary feature masks, shared by NSGA-II and MOEA/D.

Mutation is the binary specialization of polynomial mutation: every gene
flips independently with probability pm.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class GaParams(BaseModel):
    """Crossover and per-gene mutation probabilities."""

    model_config = ConfigDict(frozen=True)

    pc: float = Field(0.95, ge=0, le=1)
    pm: float = Field(0.05, ge=0, le=1)


def swap_suffixes(p1: np.ndarray, p2: np.ndarray, cut: int) -> tuple[np.ndarray, np.ndarray]:
    """Exchange everything from position `cut` onward."""
    c1 = np.concatenate([p1[:cut], p2[cut:]])
    c2 = np.concatenate([p2[:cut], p1[cut:]])
    return c1, c2


def one_point_crossover(
    p1: np.ndarray, p2: np.ndarray, pc: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """With probability pc swap suffixes at a cut drawn uniformly in [1, n-1]; else copy the parents."""
    p1 = np.asarray(p1, dtype=bool)
    p2 = np.asarray(p2, dtype=bool)
    if p1.shape != p2.shape:
        raise ValueError(f"parent lengths differ: {p1.size} vs {p2.size}")
    if p1.size < 2:
        raise ValueError("one-point crossover needs at least 2 genes")
    if rng.random() < pc:
        return swap_suffixes(p1, p2, int(rng.integers(1, p1.size)))
    return p1.copy(), p2.copy()


def mutate_bits(bits: np.ndarray, pm: float, rng: np.random.Generator) -> np.ndarray:
    bits = np.asarray(bits, dtype=bool)
    return bits ^ (rng.random(bits.size) < pm)


def repair_mask(bits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Set one uniformly random bit of an all-zero mask; other masks pass through."""
    bits = np.array(bits, dtype=bool)
    if not bits.any():
        bits[rng.integers(bits.size)] = True
    return bits
