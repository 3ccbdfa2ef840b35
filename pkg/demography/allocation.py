"""
Camp-to-grid population apportionment.

Camp totals are spread over grid cells in proportion to detected shelter
area: each camp gets a density (persons per m² of shelter inside the camp),
and a cell receives density x shelter area inside cell ∩ camp, summed over
camps. Total, female and male streams are apportioned independently.
Fractional persons are kept throughout.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import shapely
from shapely import STRtree

from core.errors import DemographyError, GeometryError
from core.logger import DIAGNOSTIC, get_logger
from core.schema import GenderStream
from geo.grid import CellId, GridCell, GridSpec
from geo.primitives import Areal, validate_polygon

logger = get_logger(__name__)

STREAMS = ("total", "female", "male")


@dataclass(frozen=True)
class Camp:
    """
    A camp boundary with its population figures.

    pop_female + pop_male need not equal pop_total (sources round separately).
    """

    camp_id: str
    boundary: Areal = field(compare=False)
    pop_total: float
    pop_female: float = 0.0
    pop_male: float = 0.0

    def __post_init__(self):
        validate_polygon(self.boundary, f"camp {self.camp_id}")
        for stream in STREAMS:
            value = getattr(self, f"pop_{stream}")
            if not (math.isfinite(value) and value >= 0):
                raise DemographyError(
                    f"Camp {self.camp_id}: pop_{stream} must be a finite value >= 0, got {value}",
                    camp_id=self.camp_id,
                )

    def population(self, stream: str) -> float:
        return float(getattr(self, f"pop_{stream}"))


@dataclass
class ShelterSet:
    """
    Detected shelters, either as footprint polygons or as shelter area per grid cell.

    Attributes:
        footprints: Shelter footprint polygons
        area_by_cell: Alternative rasterized form, shelter m² keyed by (row, col)
    """

    footprints: Sequence[Areal] = ()
    area_by_cell: Optional[Mapping[CellId, float]] = None
    _tree: Optional[STRtree] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.footprints = np.asarray(list(self.footprints), dtype=object)
        for k, footprint in enumerate(self.footprints):
            try:
                validate_polygon(footprint, f"shelter {k}")
            except GeometryError as e:
                raise GeometryError(f"Every shelter footprint needs area > 0: {e}") from e
        if self.area_by_cell is not None:
            for key, area in self.area_by_cell.items():
                if area < 0:
                    raise GeometryError(f"Negative shelter area {area} for cell {key}")

    @property
    def is_raster(self) -> bool:
        return self.area_by_cell is not None

    @property
    def tree(self) -> STRtree:
        if self._tree is None:
            self._tree = STRtree(self.footprints)
        return self._tree

    def clipped_to(self, boundary: Areal) -> np.ndarray:
        """Footprint pieces inside a boundary (empty pieces dropped)."""
        if len(self.footprints) == 0:
            return np.asarray([], dtype=object)
        idx = self.tree.query(boundary, predicate="intersects")
        if len(idx) == 0:
            return np.asarray([], dtype=object)
        pieces = shapely.intersection(self.footprints[np.sort(idx)], boundary)
        return pieces[shapely.area(pieces) > 0]


@dataclass(frozen=True)
class CampDensity:
    """Persons per m² of shelter area, per stream."""

    camp_id: str
    shelter_area: float
    total: float
    female: float
    male: float

    def value(self, stream: str) -> float:
        return getattr(self, stream)


@dataclass
class PopulationField:
    """
    Population per grid cell, aligned with `cells`.

    Attributes:
        spec: Grid the cells belong to
        cells: Demand cells in (row, col) order
        total, female, male: Persons per cell (fractional)
    """

    spec: GridSpec
    cells: List[GridCell]
    total: np.ndarray
    female: np.ndarray
    male: np.ndarray

    def __post_init__(self):
        for stream in STREAMS:
            values = np.asarray(getattr(self, stream), dtype=float)
            if values.shape != (len(self.cells),):
                raise DemographyError(
                    f"{stream} population has shape {values.shape}, expected ({len(self.cells)},)"
                )
            if np.any(values < 0) or not np.all(np.isfinite(values)):
                raise DemographyError(f"{stream} population must be finite and >= 0")
            setattr(self, stream, values)

    def stream(self, stream: GenderStream | str) -> np.ndarray:
        name = stream.value if isinstance(stream, GenderStream) else stream
        return getattr(self, name)

    def mass(self, stream: str = "total") -> float:
        return float(self.stream(stream).sum())

    def __len__(self) -> int:
        return len(self.cells)


def _densities(camp: Camp, shelter_area: float) -> CampDensity:
    if not shelter_area > 0:
        raise DemographyError(
            f"Camp {camp.camp_id} has no shelter area inside its boundary",
            camp_id=camp.camp_id,
        )
    return CampDensity(
        camp_id=camp.camp_id,
        shelter_area=shelter_area,
        total=camp.pop_total / shelter_area,
        female=camp.pop_female / shelter_area,
        male=camp.pop_male / shelter_area,
    )


def density_per_camp(camp: Camp, shelters: ShelterSet) -> CampDensity:
    """
    People per m² of shelter area inside the camp, per stream.

    Shelters are clipped to the camp boundary first, so a footprint straddling
    two camps contributes only its inside part.

    Raises:
        DemographyError: If the camp contains no shelter area (names the camp)
    """
    if shelters.is_raster:
        raise DemographyError(
            "density_per_camp needs shelter footprints; use allocate_population for area maps"
        )
    pieces = shelters.clipped_to(camp.boundary)
    return _densities(camp, float(shapely.area(pieces).sum()) if len(pieces) else 0.0)


def shelter_area_by_camp(camps: Sequence[Camp], shelters: ShelterSet) -> Dict[str, float]:
    """Clipped shelter area (m²) per camp."""
    return {
        camp.camp_id: float(shapely.area(shelters.clipped_to(camp.boundary)).sum())
        for camp in camps
    }


def allocate_population(
    spec: GridSpec,
    cells: List[GridCell],
    camps: Sequence[Camp],
    shelters: ShelterSet,
) -> PopulationField:
    """
    Apportion camp populations to grid cells by shelter area.

    Camps whose boundaries contain no shelter at all are skipped with a
    diagnostic; their population cannot be placed on the grid.

    Args:
        spec: Grid specification
        cells: Grid cells receiving population
        camps: Camps with boundaries and population figures
        shelters: Footprints or a per-cell shelter area map

    Returns:
        PopulationField aligned with `cells`

    Raises:
        DemographyError: Propagated from the density computation
    """
    if shelters.is_raster:
        return _allocate_from_area_map(spec, cells, camps, shelters.area_by_cell)

    n = len(cells)
    values = {stream: np.zeros(n) for stream in STREAMS}
    if n == 0:
        return PopulationField(spec=spec, cells=cells, **values)

    cell_geoms = np.asarray([cell.geometry for cell in cells], dtype=object)
    cell_tree = STRtree(cell_geoms)

    for camp in camps:
        pieces = shelters.clipped_to(camp.boundary)
        if len(pieces) == 0:
            logger.log(
                DIAGNOSTIC,
                f"Camp {camp.camp_id} contains no shelters; its population is not allocated",
            )
            continue
        density = _densities(camp, float(shapely.area(pieces).sum()))

        piece_idx, cell_idx = cell_tree.query(pieces, predicate="intersects")
        overlap = shapely.area(shapely.intersection(pieces[piece_idx], cell_geoms[cell_idx]))
        for stream in STREAMS:
            np.add.at(values[stream], cell_idx, density.value(stream) * overlap)

        placed = float(overlap.sum())
        if not math.isclose(placed, density.shelter_area, rel_tol=1e-9):
            logger.warning(
                f"Camp {camp.camp_id}: grid covers {placed:.1f} of "
                f"{density.shelter_area:.1f} m² shelter area"
            )

    field_ = PopulationField(spec=spec, cells=cells, **values)
    logger.info(
        f"Allocated {field_.mass():.1f} persons over {n} cells from {len(camps)} camps"
    )
    return field_


def _allocate_from_area_map(
    spec: GridSpec,
    cells: List[GridCell],
    camps: Sequence[Camp],
    area_by_cell: Mapping[CellId, float],
) -> PopulationField:
    """
    Apportion from a rasterized shelter area map.

    A cell's shelter area is split between camps by the share of the cell
    square inside each camp; the share outside every camp is ignored.
    """
    n = len(cells)
    values = {stream: np.zeros(n) for stream in STREAMS}
    cell_area = np.array([area_by_cell.get(cell.key, 0.0) for cell in cells], dtype=float)
    if n == 0 or not np.any(cell_area > 0):
        return PopulationField(spec=spec, cells=cells, **values)

    cell_geoms = np.asarray([cell.geometry for cell in cells], dtype=object)
    square = spec.cell_size**2

    for camp in camps:
        share = shapely.area(shapely.intersection(cell_geoms, camp.boundary)) / square
        in_camp = cell_area * share
        shelter_area = float(in_camp.sum())
        if not shelter_area > 0:
            logger.log(
                DIAGNOSTIC,
                f"Camp {camp.camp_id} has no shelter area in the area map; skipped",
            )
            continue
        density = _densities(camp, shelter_area)
        for stream in STREAMS:
            values[stream] += density.value(stream) * in_camp

    return PopulationField(spec=spec, cells=cells, **values)


__all__ = [
    "Camp",
    "ShelterSet",
    "CampDensity",
    "PopulationField",
    "density_per_camp",
    "shelter_area_by_camp",
    "allocate_population",
]
