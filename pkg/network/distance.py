"""
Demand-supply distance from network distance plus snap offsets.
"""

import math

import numpy as np


def pair_distance(e: float, s_i: float, s_j: float, g: float) -> float:
    """
    Travel distance between two snapped points.

    When the straight-line gap is shorter than the two offsets together the
    points are treated as directly reachable; otherwise the walk is offset,
    network path, offset.

    Args:
        e: Euclidean distance between the original points
        s_i, s_j: Snap offsets of the two points
        g: Network distance between their anchors (inf allowed)

    Example:
        >>> pair_distance(200.0, 5.0, 7.0, 100.0)
        112.0
        >>> pair_distance(10.0, 5.0, 7.0, 100.0)
        10.0
    """
    if e < s_i + s_j:
        return float(e)
    if math.isinf(g):
        return math.inf
    return float(g + (s_i + s_j))


def pair_distances(
    e: np.ndarray, s_i: np.ndarray, s_j: np.ndarray, g: np.ndarray
) -> np.ndarray:
    """Vectorized pair_distance over aligned arrays."""
    e = np.asarray(e, dtype=float)
    offsets = np.asarray(s_i, dtype=float) + np.asarray(s_j, dtype=float)
    return np.where(e < offsets, e, np.asarray(g, dtype=float) + offsets)


__all__ = ["pair_distance", "pair_distances"]
