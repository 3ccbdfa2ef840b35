"""Population apportionment to grid cells and shelter-area statistics."""

from demography.allocation import (
    Camp,
    CampDensity,
    PopulationField,
    ShelterSet,
    allocate_population,
    density_per_camp,
    shelter_area_by_camp,
)
from demography.living_space import (
    EMERGENCY_STANDARD_M2,
    LivingSpaceRow,
    living_space_report,
    living_space_series,
)
from demography.units import CampUnitChange, camp_unit_change

__all__ = [
    "Camp",
    "CampDensity",
    "PopulationField",
    "ShelterSet",
    "allocate_population",
    "density_per_camp",
    "shelter_area_by_camp",
    "EMERGENCY_STANDARD_M2",
    "LivingSpaceRow",
    "living_space_report",
    "living_space_series",
    "CampUnitChange",
    "camp_unit_change",
]
