"""
The two 2SFCA steps over a sparse kernel matrix.

Step 1 gives each facility its provider-to-population ratio
R_j = S_j / sum_i P_i K_ij; step 2 gives each demand cell its score
A_i = sum_j R_j K_ij. K is an (n_demand, n_facility) CSR matrix holding
only pairs inside the catchment.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import sparse

from core.errors import DemographyError
from core.logger import DIAGNOSTIC, get_logger

logger = get_logger(__name__)


@dataclass
class ProviderRatios:
    """
    Step-1 result.

    Attributes:
        ratios: R_j per facility
        weighted_demand: sum_i P_i K_ij per facility (the denominator)
        zero_demand: Indices of facilities with no weighted demand (R_j = 0)
        facility_ids: Optional ids aligned with `ratios`
    """

    ratios: np.ndarray
    weighted_demand: np.ndarray
    zero_demand: np.ndarray
    facility_ids: List[str] = field(default_factory=list)

    @property
    def zero_demand_ids(self) -> List[str]:
        if not self.facility_ids:
            return [str(k) for k in self.zero_demand]
        return [self.facility_ids[k] for k in self.zero_demand]


def provider_ratios(
    capacity: Sequence[float],
    population: np.ndarray,
    weights: sparse.csr_matrix,
    demand_column: Optional[Sequence[int]] = None,
    facility_ids: Optional[Sequence[str]] = None,
) -> ProviderRatios:
    """
    Provider-to-population ratio of every facility.

    Args:
        capacity: S_j per facility (fractional after scenario scaling)
        population: (n,) demand per cell, or (n, k) with one column per demand stream
        weights: (n, m) kernel matrix K_ij
        demand_column: For 2-D population, which column competes for facility j
        facility_ids: Ids used in the diagnostics

    Returns:
        ProviderRatios; facilities with zero weighted demand get R_j = 0

    Raises:
        DemographyError: If any population value is negative

    Example:
        >>> K = sparse.csr_matrix(np.array([[1.0], [0.5]]))
        >>> provider_ratios([2.0], np.array([10.0, 20.0]), K).ratios
        array([0.1])
    """
    capacity = np.asarray(capacity, dtype=float)
    population = np.asarray(population, dtype=float)
    if np.any(population < 0):
        raise DemographyError("Population values must be >= 0")

    weights = sparse.csr_matrix(weights)
    n, m = weights.shape
    if capacity.shape != (m,):
        raise ValueError(f"capacity has shape {capacity.shape}, expected ({m},)")

    if population.ndim == 1:
        weighted = weights.T @ population
    else:
        if demand_column is None:
            raise ValueError("demand_column is required for multi-stream population")
        columns = np.asarray(demand_column, dtype=np.int64)
        per_stream = weights.T @ population
        weighted = per_stream[np.arange(m), columns]
    weighted = np.asarray(weighted, dtype=float).ravel()

    ratios = np.zeros(m)
    served = weighted > 0
    ratios[served] = capacity[served] / weighted[served]
    zero = np.flatnonzero(~served)

    ids = list(facility_ids) if facility_ids is not None else []
    result = ProviderRatios(ratios=ratios, weighted_demand=weighted, zero_demand=zero, facility_ids=ids)
    if len(zero):
        logger.log(
            DIAGNOSTIC,
            f"{len(zero)} of {m} facilities have no demand in their catchment: "
            f"{', '.join(result.zero_demand_ids[:10])}{' ...' if len(zero) > 10 else ''}",
        )
    return result


def accessibility_scores(ratios: ProviderRatios | np.ndarray, weights: sparse.csr_matrix) -> np.ndarray:
    """
    A_i = sum_j R_j K_ij for every demand cell.

    Cells with no facility inside the catchment score exactly 0.
    """
    r = ratios.ratios if isinstance(ratios, ProviderRatios) else np.asarray(ratios, dtype=float)
    return np.asarray(sparse.csr_matrix(weights) @ r, dtype=float).ravel()


def unreached_cells(weights: sparse.csr_matrix) -> np.ndarray:
    """Indices of demand cells with no facility inside the catchment."""
    return np.flatnonzero(np.diff(sparse.csr_matrix(weights).indptr) == 0)


__all__ = ["ProviderRatios", "provider_ratios", "accessibility_scores", "unreached_cells"]
