"""
Planar geometry primitives.

Points and polygons are shapely geometries in a projected metric CRS; this
module adds the validation and the few measurements the rest of the package
relies on. Nothing here reprojects.
"""

import math
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Point, Polygon
from shapely.validation import explain_validity

from core.errors import GeometryError

Areal = Union[Polygon, MultiPolygon]
Coordinate = Tuple[float, float]


def make_point(x: float, y: float) -> Point:
    """
    Build a point in projected meters.

    Raises:
        GeometryError: If a coordinate is not finite
    """
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"Point coordinates must be finite, got ({x}, {y})")
    return Point(float(x), float(y))


def make_polygon(
    exterior: Sequence[Coordinate], interiors: Optional[Iterable[Sequence[Coordinate]]] = None
) -> Polygon:
    """
    Build and validate a polygon from ring coordinates.

    Rings may be given open or closed; shapely closes them.

    Example:
        >>> make_polygon([(0, 0), (1, 0), (1, 1), (0, 1)]).area
        1.0
    """
    return validate_polygon(Polygon(exterior, list(interiors or [])))


def validate_polygon(geom: Areal, label: str = "polygon") -> Areal:
    """
    Check ring topology and area.

    Args:
        geom: Polygon or MultiPolygon
        label: Name used in the error message (camp id, feature id, ...)

    Raises:
        GeometryError: If the geometry is not areal, invalid, or has zero area
    """
    if not isinstance(geom, (Polygon, MultiPolygon)):
        raise GeometryError(f"{label} must be a Polygon or MultiPolygon, got {geom.geom_type}")
    if geom.is_empty:
        raise GeometryError(f"{label} is empty")
    if not geom.is_valid:
        raise GeometryError(f"{label} has invalid ring topology: {explain_validity(geom)}")
    if not geom.area > 0:
        raise GeometryError(f"{label} is degenerate (zero area)")
    return geom


def polygon_area(geom: Areal) -> float:
    """Area in m²; interior rings subtract."""
    return float(shapely.area(geom))


def intersection_area(a: Areal, b: Areal) -> float:
    """
    Area of a ∩ b in m².

    Raises:
        GeometryError: If either polygon has invalid ring topology
    """
    validate_polygon(a, "first polygon")
    validate_polygon(b, "second polygon")
    if not a.intersects(b):
        return 0.0
    return float(shapely.intersection(a, b).area)


def euclidean(a: Point, b: Point) -> float:
    """Straight-line distance in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


def euclidean_many(a_xy: np.ndarray, b_xy: np.ndarray) -> np.ndarray:
    """Row-wise distances between two (n, 2) coordinate arrays."""
    a_xy = np.asarray(a_xy, dtype=float)
    b_xy = np.asarray(b_xy, dtype=float)
    return np.hypot(a_xy[:, 0] - b_xy[:, 0], a_xy[:, 1] - b_xy[:, 1])


def coords_of(points: Iterable[Point]) -> np.ndarray:
    """Stack point coordinates into an (n, 2) float array."""
    xy = shapely.get_coordinates(np.asarray(list(points), dtype=object))
    return xy.reshape(-1, 2).astype(float)


__all__ = [
    "Areal",
    "make_point",
    "make_polygon",
    "validate_polygon",
    "polygon_area",
    "intersection_area",
    "euclidean",
    "euclidean_many",
    "coords_of",
]
