"""Planar geometry primitives and the regular analysis grid."""

from geo.grid import GridCell, GridSpec, build_grid, cell_index, cells_from_ids, centroid_array
from geo.primitives import (
    euclidean,
    euclidean_many,
    intersection_area,
    make_point,
    make_polygon,
    polygon_area,
    validate_polygon,
)

__all__ = [
    "GridCell",
    "GridSpec",
    "build_grid",
    "cell_index",
    "cells_from_ids",
    "centroid_array",
    "euclidean",
    "euclidean_many",
    "intersection_area",
    "make_point",
    "make_polygon",
    "polygon_area",
    "validate_polygon",
]
