"""
Rank correlation used to validate camp-level accessibility against surveys.
"""

from typing import Sequence

import numpy as np
from scipy import stats

from core.errors import UndefinedStatisticError


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Spearman's rho: Pearson correlation of average ranks.

    Raises:
        ValueError: If the lengths differ or fewer than 3 values are given
        UndefinedStatisticError: If either series is constant or not finite

    Example:
        >>> spearman([1, 2, 3], [3, 2, 1])
        -1.0
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"spearman needs two 1-D series of equal length, got {x.shape} and {y.shape}")
    if len(x) < 3:
        raise ValueError(f"spearman needs at least 3 pairs, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise UndefinedStatisticError("Rank correlation is undefined for non-finite values")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedStatisticError("Rank correlation is undefined for a constant series")
    return float(stats.spearmanr(x, y).statistic)


__all__ = ["spearman"]
