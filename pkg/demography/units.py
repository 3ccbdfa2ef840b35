"""
Camp-level population and facility densities for two epochs.
"""

from typing import List, Sequence

import numpy as np
import shapely
from pydantic import BaseModel

from core.logger import get_logger
from core.schema import Facility
from demography.allocation import Camp

logger = get_logger(__name__)

M2_PER_KM2 = 1_000_000.0


class CampUnitChange(BaseModel):
    """Population density (persons/km²) and facility density (units/km²) per camp."""

    camp_id: str
    area_km2: float
    population_density_a: float
    population_density_b: float
    facility_density_a: float
    facility_density_b: float

    @property
    def population_density_change(self) -> float:
        return self.population_density_b - self.population_density_a

    @property
    def facility_density_change(self) -> float:
        return self.facility_density_b - self.facility_density_a


def _units_inside(camp: Camp, facilities: Sequence[Facility]) -> float:
    if not facilities:
        return 0.0
    points = shapely.points(np.array([(f.x, f.y) for f in facilities], dtype=float))
    inside = shapely.covers(camp.boundary, points)
    return float(sum(f.capacity for f, hit in zip(facilities, inside) if hit))


def camp_unit_change(
    camps_a: Sequence[Camp],
    camps_b: Sequence[Camp],
    facilities_a: Sequence[Facility],
    facilities_b: Sequence[Facility],
) -> List[CampUnitChange]:
    """
    Compare camp-level densities between epoch a and epoch b.

    Camps are matched by camp_id; the epoch-a boundary defines the area.
    Camps missing from either epoch are skipped with a warning.
    """
    by_id_b = {camp.camp_id: camp for camp in camps_b}
    rows: List[CampUnitChange] = []
    for camp in camps_a:
        other = by_id_b.get(camp.camp_id)
        if other is None:
            logger.warning(f"Camp {camp.camp_id} missing from the second epoch; skipped")
            continue
        area_km2 = camp.boundary.area / M2_PER_KM2
        rows.append(
            CampUnitChange(
                camp_id=camp.camp_id,
                area_km2=area_km2,
                population_density_a=camp.pop_total / area_km2,
                population_density_b=other.pop_total / area_km2,
                facility_density_a=_units_inside(camp, facilities_a) / area_km2,
                facility_density_b=_units_inside(camp, facilities_b) / area_km2,
            )
        )
    return rows
