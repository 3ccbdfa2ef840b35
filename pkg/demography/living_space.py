"""
Shelter area per person over time.
"""

from typing import Dict, List, Mapping

from pydantic import BaseModel

from core.errors import DemographyError

# Emergency minimum covered living space per person in tropical climates (m²)
EMERGENCY_STANDARD_M2 = 3.5


class LivingSpaceRow(BaseModel):
    epoch: str
    shelter_area: float
    population: float
    area_per_person: float
    below_standard: bool


def living_space_series(
    area_by_epoch: Mapping[str, float], pop_by_epoch: Mapping[str, float]
) -> Dict[str, float]:
    """
    Living space per person (m² per person) for every epoch with a shelter area.

    Args:
        area_by_epoch: Total shelter area per epoch, m²
        pop_by_epoch: Population per epoch, persons

    Raises:
        DemographyError: If an epoch has no population figure or a population <= 0

    Example:
        >>> living_space_series({"2025": 7.33e6}, {"2025": 1e6})
        {'2025': 7.33}
    """
    areas = {str(k): float(v) for k, v in area_by_epoch.items()}
    pops = {str(k): float(v) for k, v in pop_by_epoch.items()}
    series: Dict[str, float] = {}
    for epoch in sorted(areas):
        if epoch not in pops:
            raise DemographyError(f"Epoch {epoch}: no population figure")
        population = pops[epoch]
        if not population > 0:
            raise DemographyError(f"Epoch {epoch}: population must be > 0, got {population}")
        series[epoch] = areas[epoch] / population
    return series


def living_space_report(
    area_by_epoch: Mapping[str, float],
    pop_by_epoch: Mapping[str, float],
    standard: float = EMERGENCY_STANDARD_M2,
) -> List[LivingSpaceRow]:
    """Living space series with each epoch flagged against a per-person standard."""
    series = living_space_series(area_by_epoch, pop_by_epoch)
    areas = {str(k): float(v) for k, v in area_by_epoch.items()}
    pops = {str(k): float(v) for k, v in pop_by_epoch.items()}
    return [
        LivingSpaceRow(
            epoch=epoch,
            shelter_area=areas[epoch],
            population=pops[epoch],
            area_per_person=value,
            below_standard=value < standard,
        )
        for epoch, value in series.items()
    ]
