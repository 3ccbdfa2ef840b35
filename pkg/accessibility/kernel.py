"""
Truncated Gaussian distance decay.
"""

import math

import numpy as np

from core.schema import DecayKernel


def decay_weight(d: float, kernel: DecayKernel) -> float:
    """
    Weight of a demand-supply pair at distance d.

    exp(-d²/σ²) inside the catchment, exactly 0 beyond d0.

    Example:
        >>> decay_weight(402.0, DecayKernel(sigma=402.0, d0=1609.0))
        0.36787944117144233
    """
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    if d > kernel.d0:
        return 0.0
    return math.exp(-(d * d) / (kernel.sigma * kernel.sigma))


def decay_weights(d: np.ndarray, kernel: DecayKernel) -> np.ndarray:
    """Vectorized decay_weight; inf distances map to 0."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("distances must be >= 0")
    with np.errstate(over="ignore"):
        weights = np.exp(-(d * d) / (kernel.sigma * kernel.sigma))
    return np.where(d <= kernel.d0, weights, 0.0)


__all__ = ["decay_weight", "decay_weights"]
