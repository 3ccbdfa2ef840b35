"""
Regular analysis grid.

Cells are axis-aligned squares whose lower-left corners sit on integer
multiples of the cell size, so the same AOI always yields the same cell ids.
Row 0 is the southernmost row; rows grow with y, columns with x.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np
import shapely
from pydantic import BaseModel, ConfigDict, Field, model_validator
from shapely.geometry import Point, Polygon, box

from core.errors import GeometryError
from core.logger import get_logger
from geo.primitives import Areal, validate_polygon

logger = get_logger(__name__)

CellId = Tuple[int, int]


class GridSpec(BaseModel):
    """
    Placement and size of the analysis grid.

    Attributes:
        origin_x, origin_y: Lower-left corner of cell (0, 0), in meters
        cell_size: Side length of a cell in meters
        n_cols, n_rows: Extent of the grid in cells
    """

    model_config = ConfigDict(frozen=True)

    origin_x: float
    origin_y: float
    cell_size: float = Field(..., gt=0)
    n_cols: int = Field(..., ge=1)
    n_rows: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _snapped_origin(self) -> "GridSpec":
        for value in (self.origin_x, self.origin_y):
            ratio = value / self.cell_size
            if not math.isclose(ratio, round(ratio), abs_tol=1e-9):
                raise ValueError(
                    f"grid origin {value} is not a multiple of cell size {self.cell_size}"
                )
        return self

    def cell_polygon(self, row: int, col: int) -> Polygon:
        x0 = self.origin_x + col * self.cell_size
        y0 = self.origin_y + row * self.cell_size
        return box(x0, y0, x0 + self.cell_size, y0 + self.cell_size)

    def cell_centroid(self, row: int, col: int) -> Point:
        half = self.cell_size / 2.0
        return Point(
            self.origin_x + col * self.cell_size + half,
            self.origin_y + row * self.cell_size + half,
        )

    def cell_of(self, x: float, y: float) -> CellId:
        """(row, col) of the cell containing (x, y); may fall outside the grid extent."""
        col = math.floor((x - self.origin_x) / self.cell_size)
        row = math.floor((y - self.origin_y) / self.cell_size)
        return row, col

    def contains_cell(self, row: int, col: int) -> bool:
        return 0 <= row < self.n_rows and 0 <= col < self.n_cols


@dataclass(frozen=True)
class GridCell:
    """One square demand unit; its centroid is the demand location."""

    row: int
    col: int
    centroid: Point = field(compare=False)
    geometry: Polygon = field(compare=False)

    @property
    def cell_id(self) -> str:
        return f"{self.row}_{self.col}"

    @property
    def key(self) -> CellId:
        return self.row, self.col


def build_grid(aoi: Areal, cell_size: float) -> Tuple[GridSpec, List[GridCell]]:
    """
    Build the grid cells whose squares overlap the AOI.

    Only cells sharing positive area with the AOI are returned, so cells that
    merely touch its boundary are left out. Cells are ordered by (row, col).

    Args:
        aoi: Area of interest
        cell_size: Cell side length in meters

    Returns:
        The grid specification and its cells

    Raises:
        GeometryError: If cell_size <= 0 or the AOI is invalid or has zero area
    """
    if not cell_size > 0:
        raise GeometryError(f"cell_size must be > 0, got {cell_size}")
    validate_polygon(aoi, "area of interest")

    minx, miny, maxx, maxy = aoi.bounds
    origin_x = math.floor(minx / cell_size) * cell_size
    origin_y = math.floor(miny / cell_size) * cell_size
    n_cols = max(1, math.ceil((maxx - origin_x) / cell_size))
    n_rows = max(1, math.ceil((maxy - origin_y) / cell_size))
    spec = GridSpec(
        origin_x=origin_x, origin_y=origin_y, cell_size=cell_size, n_cols=n_cols, n_rows=n_rows
    )

    rows, cols = np.divmod(np.arange(n_rows * n_cols), n_cols)
    x0 = origin_x + cols * cell_size
    y0 = origin_y + rows * cell_size
    squares = shapely.box(x0, y0, x0 + cell_size, y0 + cell_size)

    shapely.prepare(aoi)
    hit = shapely.intersects(aoi, squares)
    overlap = np.zeros(len(squares))
    overlap[hit] = shapely.area(shapely.intersection(squares[hit], aoi))
    keep = np.flatnonzero(overlap > 0)

    cells = [
        GridCell(
            row=int(rows[k]),
            col=int(cols[k]),
            centroid=spec.cell_centroid(int(rows[k]), int(cols[k])),
            geometry=squares[k],
        )
        for k in keep
    ]
    logger.info(
        f"Built {len(cells)} cells of {cell_size:g} m ({n_rows}x{n_cols} bounding grid)"
    )
    return spec, cells


def cells_from_ids(spec: GridSpec, ids: Iterable[CellId]) -> List[GridCell]:
    """Rebuild GridCell objects for known (row, col) ids, e.g. after reloading a field."""
    return [
        GridCell(
            row=row,
            col=col,
            centroid=spec.cell_centroid(row, col),
            geometry=spec.cell_polygon(row, col),
        )
        for row, col in ids
    ]


def centroid_array(cells: List[GridCell]) -> np.ndarray:
    """(n, 2) array of cell centroids."""
    if not cells:
        return np.zeros((0, 2))
    return np.array([(c.centroid.x, c.centroid.y) for c in cells], dtype=float)


def cell_index(cells: List[GridCell]) -> Dict[CellId, int]:
    return {cell.key: i for i, cell in enumerate(cells)}


__all__ = [
    "CellId",
    "GridSpec",
    "GridCell",
    "build_grid",
    "cells_from_ids",
    "centroid_array",
    "cell_index",
]
