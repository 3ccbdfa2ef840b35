"""
Exception types raised across WashAccess.

Input errors derive from ValueError as well, so callers that only care about
bad input can keep catching the built-in type. DistanceModelError derives
from RuntimeError instead. The CLI maps every WashAccessError to exit code 1.
"""

from typing import Optional


class WashAccessError(Exception):
    """Base class for every error raised on purpose by this package."""


class GeometryError(WashAccessError, ValueError):
    """Invalid or degenerate geometry (zero-area AOI, broken ring topology)."""


class DemographyError(WashAccessError, ValueError):
    """Population apportionment failed for a specific camp or epoch."""

    def __init__(self, message: str, camp_id: Optional[str] = None):
        super().__init__(message)
        self.camp_id = camp_id


class ScenarioError(WashAccessError, ValueError):
    """A gender scenario was requested that the data cannot support."""


class GridMismatchError(WashAccessError, ValueError):
    """Two accessibility fields were built on different grids."""


class MaskShapeError(WashAccessError, ValueError):
    """Binary masks compared pixelwise have different dimensions."""


class UndefinedStatisticError(WashAccessError, ValueError):
    """A statistic is undefined for the given input (e.g. constant series)."""


class DistanceModelError(WashAccessError, RuntimeError):
    """A registered distance model could not be constructed."""


class DatasetError(WashAccessError, ValueError):
    """Input layer failed validation.

    Attributes:
        layer: Name of the input layer (facilities, camps, footpaths, ...)
        feature_id: Feature id or 1-based line number where the problem was found
    """

    def __init__(
        self, message: str, layer: Optional[str] = None, feature_id: Optional[str] = None
    ):
        context = ""
        if layer:
            context = f"[{layer}"
            context += f" #{feature_id}]" if feature_id is not None else "]"
            context += " "
        super().__init__(f"{context}{message}")
        self.layer = layer
        self.feature_id = feature_id


__all__ = [
    "WashAccessError",
    "GeometryError",
    "DemographyError",
    "ScenarioError",
    "GridMismatchError",
    "MaskShapeError",
    "UndefinedStatisticError",
    "DistanceModelError",
    "DatasetError",
]
