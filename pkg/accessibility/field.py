"""
Accessibility fields over the analysis grid and the arithmetic done on them.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import shapely

from core.errors import GridMismatchError
from core.logger import DIAGNOSTIC, get_logger
from core.schema import KIND_COLUMNS, FacilityKind, GenderStream
from demography.allocation import Camp, PopulationField
from geo.grid import GridCell, GridSpec, centroid_array

logger = get_logger(__name__)


@dataclass
class AccessField:
    """
    Accessibility scores A_i per cell and facility kind.

    Attributes:
        spec: Grid the values live on
        cells: Cells in (row, col) order
        values: A_i per kind, each aligned with `cells`
        stream: Population stream the scores were computed for
        tag: Free-form scenario label ("total", "female_0.75", "change", ...)
        population: Demand used for the run, if any
    """

    spec: GridSpec
    cells: List[GridCell]
    values: Dict[FacilityKind, np.ndarray]
    stream: GenderStream = GenderStream.TOTAL
    tag: str = "total"
    population: Optional[PopulationField] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.values:
            raise ValueError("An access field needs at least one facility kind")
        ordered: Dict[FacilityKind, np.ndarray] = {}
        for kind in FacilityKind:
            if kind in self.values:
                array = np.asarray(self.values[kind], dtype=float)
                if array.shape != (len(self.cells),):
                    raise ValueError(
                        f"{kind.value} values have shape {array.shape}, expected ({len(self.cells)},)"
                    )
                ordered[kind] = array
        self.values = ordered

    @property
    def kinds(self) -> List[FacilityKind]:
        return list(self.values)

    @property
    def mean(self) -> np.ndarray:
        """Unweighted mean over the kinds present."""
        return np.mean(np.stack(list(self.values.values())), axis=0)

    def column(self, name: Union[str, FacilityKind]) -> np.ndarray:
        """Values for a kind, its column name (A_water, ...) or "A_mean"/"mean"."""
        if isinstance(name, FacilityKind):
            return self.values[name]
        if name in ("mean", "A_mean"):
            return self.mean
        for kind, column in KIND_COLUMNS.items():
            if name in (kind.value, column):
                return self.values[kind]
        raise KeyError(f"Unknown field column: {name}")

    @property
    def cell_ids(self) -> List[str]:
        return [cell.cell_id for cell in self.cells]

    def __len__(self) -> int:
        return len(self.cells)


def _check_same_grid(a: AccessField, b: AccessField) -> None:
    if a.spec != b.spec:
        raise GridMismatchError(f"Fields were built on different grids: {a.spec} vs {b.spec}")
    if [c.key for c in a.cells] != [c.key for c in b.cells]:
        raise GridMismatchError("Fields cover different cell sets on the same grid")


def _common_kinds(a: AccessField, b: AccessField) -> List[FacilityKind]:
    common = [kind for kind in a.kinds if kind in b.values]
    if not common:
        raise GridMismatchError("Fields share no facility kind")
    if len(common) != len(a.kinds) or len(common) != len(b.kinds):
        logger.warning(
            f"Comparing only the shared kinds: {', '.join(k.value for k in common)}"
        )
    return common


def change_field(epoch_a: AccessField, epoch_b: AccessField) -> AccessField:
    """
    Per-cell difference b - a for every kind both fields carry.

    Raises:
        GridMismatchError: If the grids or cell sets differ
    """
    _check_same_grid(epoch_a, epoch_b)
    kinds = _common_kinds(epoch_a, epoch_b)
    return AccessField(
        spec=epoch_a.spec,
        cells=epoch_a.cells,
        values={kind: epoch_b.values[kind] - epoch_a.values[kind] for kind in kinds},
        stream=epoch_b.stream,
        tag="change",
    )


def gender_gap(female: AccessField, male: AccessField) -> AccessField:
    """Female minus male accessibility; positive where women and girls are better served."""
    _check_same_grid(female, male)
    kinds = _common_kinds(female, male)
    return AccessField(
        spec=female.spec,
        cells=female.cells,
        values={kind: female.values[kind] - male.values[kind] for kind in kinds},
        stream=GenderStream.FEMALE,
        tag="gender_gap",
    )


def people_per_facility(a: Union[float, np.ndarray, AccessField]) -> Union[float, np.ndarray]:
    """
    Persons per facility unit, 1 / A; A = 0 gives math.inf.

    Example:
        >>> people_per_facility(0.04)
        25.0
    """
    if isinstance(a, AccessField):
        a = a.mean
    if np.ndim(a) == 0:
        value = float(a)
        if value < 0:
            raise ValueError(f"accessibility must be >= 0, got {value}")
        return math.inf if value == 0 else 1.0 / value
    values = np.asarray(a, dtype=float)
    if np.any(values < 0):
        raise ValueError("accessibility must be >= 0")
    with np.errstate(divide="ignore"):
        return np.where(values == 0, np.inf, 1.0 / np.where(values == 0, 1.0, values))


def cells_in(boundary, cells: Sequence[GridCell]) -> np.ndarray:
    """Indices of cells whose centroid lies inside or on the boundary."""
    xy = centroid_array(list(cells))
    if len(xy) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(shapely.intersects_xy(boundary, xy[:, 0], xy[:, 1]))


def camp_average(
    field_: AccessField,
    camps: Sequence[Camp],
    column: Union[str, FacilityKind] = "A_mean",
    reducer: str = "cell",
    population: Optional[np.ndarray] = None,
) -> Dict[str, Optional[float]]:
    """
    Average accessibility per camp.

    Args:
        field_: Accessibility field
        camps: Camps whose boundaries select member cells by centroid
        column: Field column to average
        reducer: "cell" for the plain cell mean, "population" for the
            population-weighted mean
        population: Weights for the population reducer; defaults to the
            field's total population

    Returns:
        camp_id -> average, None where the camp has no member cells
        (or no population for the weighted reducer)
    """
    if reducer not in ("cell", "population"):
        raise ValueError(f"reducer must be 'cell' or 'population', got '{reducer}'")
    values = field_.column(column)
    if reducer == "population" and population is None:
        if field_.population is None:
            raise ValueError("The population reducer needs population weights")
        population = field_.population.total
    weights = None if population is None else np.asarray(population, dtype=float)

    averages: Dict[str, Optional[float]] = {}
    for camp in camps:
        members = cells_in(camp.boundary, field_.cells)
        if len(members) == 0:
            logger.log(DIAGNOSTIC, f"Camp {camp.camp_id} contains no grid cell centroids")
            averages[camp.camp_id] = None
        elif reducer == "cell":
            averages[camp.camp_id] = float(values[members].mean())
        else:
            total = float(weights[members].sum())
            averages[camp.camp_id] = (
                float((weights[members] * values[members]).sum() / total) if total > 0 else None
            )
    return averages


def mean_summary(field_: AccessField, population: Optional[np.ndarray] = None) -> Mapping[str, float]:
    """Grid-wide mean A (cell mean, or population-weighted when weights are given) per column."""
    summary: Dict[str, float] = {}
    columns = [KIND_COLUMNS[kind] for kind in field_.kinds] + ["A_mean"]
    for column in columns:
        values = field_.column(column)
        if population is not None and float(np.sum(population)) > 0:
            summary[column] = float(np.average(values, weights=population))
        else:
            summary[column] = float(values.mean()) if len(values) else 0.0
    return summary


__all__ = [
    "AccessField",
    "change_field",
    "gender_gap",
    "people_per_facility",
    "camp_average",
    "cells_in",
    "mean_summary",
]
