"""
Facility inventory by kind and gender designation.
"""

from typing import Dict, Optional, Sequence

from pydantic import BaseModel, Field

from core.schema import Facility, FacilityGender, FacilityKind


class KindInventory(BaseModel):
    """Unit and location counts for one facility kind."""

    kind: FacilityKind
    locations: int = 0
    units: Dict[FacilityGender, int] = Field(
        default_factory=lambda: {gender: 0 for gender in FacilityGender}
    )

    @property
    def total_units(self) -> int:
        return sum(self.units.values())

    @property
    def gender_separated_share(self) -> Optional[float]:
        """Share of units designated female or male; None without units."""
        total = self.total_units
        if total == 0:
            return None
        return (self.units[FacilityGender.FEMALE] + self.units[FacilityGender.MALE]) / total


def facility_inventory(facilities: Sequence[Facility]) -> Dict[FacilityKind, KindInventory]:
    """Units (summed capacities) per kind x gender, for every facility kind."""
    inventory = {kind: KindInventory(kind=kind) for kind in FacilityKind}
    for facility in facilities:
        entry = inventory[facility.kind]
        entry.locations += 1
        entry.units[facility.gender] += facility.capacity
    return inventory


__all__ = ["KindInventory", "facility_inventory"]
