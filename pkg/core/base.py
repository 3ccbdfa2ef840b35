"""
Base distance model abstraction for WashAccess.

Accessibility runs differ only in how demand-supply distances are obtained.
This module defines the abstract base class every distance model inherits
from, so the 2SFCA engine never needs to know whether distances came from
the pedestrian network or straight lines.
"""

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from accessibility.distances import CatchmentPairs


class BaseDistanceModel(ABC):
    """
    Abstract base class for all distance models.

    Attributes:
        name: Identifier of the model ("network", "euclidean", ...)

    Example:
        >>> class ManhattanModel(BaseDistanceModel):
        ...     def __init__(self):
        ...         super().__init__(name="manhattan")
        ...
        ...     def catchment_pairs(self, demand_xy, supply_xy, cutoff):
        ...         ...
    """

    def __init__(self, name: str):
        """
        Initialize the BaseDistanceModel.

        Args:
            name: Identifier for this model instance

        Raises:
            ValueError: If name is empty or None
        """
        if not name or not name.strip():
            raise ValueError("Distance model name must be a non-empty string")

        self.name = name.strip()

    @abstractmethod
    def catchment_pairs(
        self, demand_xy: np.ndarray, supply_xy: np.ndarray, cutoff: float
    ) -> "CatchmentPairs":
        """
        Compute every demand-supply pair whose distance is at most `cutoff`.

        Args:
            demand_xy: (n, 2) array of demand coordinates in meters
            supply_xy: (m, 2) array of supply coordinates in meters
            cutoff: Largest distance of interest (the catchment d0)

        Returns:
            CatchmentPairs holding (row, col, distance) triples
        """

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}')"
