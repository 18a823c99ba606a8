import numpy as np
from cachetools import LRUCache, cached

# --- constants ---
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1


@cached(LRUCache(maxsize=65536))
def fnv1a64(data: bytes) -> int:
    """FNV-1a, 64-bit. Frozen: genotype ids must match across runs and machines."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def shannon_diversity(abundances) -> float:
    """-sum(p ln p) over abundance fractions; 0 for one or no genotype."""
    counts = np.asarray([a for a in abundances if a > 0], dtype=float)
    if counts.size <= 1:
        return 0.0
    p = counts / counts.sum()
    h = float(-(p * np.log(p)).sum())
    # rounding noise can push an even split a hair past ln(richness)
    return min(max(h, 0.0), float(np.log(counts.size)))


def dominant(abundances: dict):
    """Key with the highest abundance, ties broken by the smaller key."""
    best = None
    for key in sorted(abundances):
        if abundances[key] <= 0:
            continue
        if best is None or abundances[key] > abundances[best]:
            best = key
    return best


def format_shannon(value: float) -> str:
    return f"{value:.6g}"


def binomial_bounds(trials: int, p: float, sigmas: float = 3.0) -> tuple:
    """Mean +- sigmas standard deviations of a Binomial(trials, p) count."""
    mean = trials * p
    sd = np.sqrt(trials * p * (1.0 - p))
    return mean - sigmas * sd, mean + sigmas * sd
