"""
Data schema definitions shared across WashAccess.

This module defines the validated record types (facilities, camps, kernels,
scenarios, run configuration) that flow between the geometry, demography,
network and accessibility layers. Bulk numeric data (fields, distance
matrices) live in numpy-backed classes next to the code that builds them.
"""

import math
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class FacilityKind(str, Enum):
    """WASH facility kinds, in the fixed output column order."""

    WATER_PUMP = "water_pump"
    LATRINE = "latrine"
    BATHING_CUBICLE = "bathing_cubicle"


class FacilityGender(str, Enum):
    """Gender designation of a facility location."""

    FEMALE = "female"
    MALE = "male"
    ALL = "all"


class GenderStream(str, Enum):
    """Population stream an accessibility run is computed for."""

    TOTAL = "total"
    FEMALE = "female"
    MALE = "male"


class DistanceMode(str, Enum):
    NETWORK = "network"
    EUCLIDEAN = "euclidean"


# Short column suffixes used by the field CSV (A_water, A_latrine, A_bath)
KIND_COLUMNS: Dict[FacilityKind, str] = {
    FacilityKind.WATER_PUMP: "A_water",
    FacilityKind.LATRINE: "A_latrine",
    FacilityKind.BATHING_CUBICLE: "A_bath",
}


class Facility(BaseModel):
    """
    A geolocated supply point.

    Attributes:
        facility_id: Unique identifier of the location
        x, y: Projected coordinates in meters
        kind: Facility kind
        capacity: S_j, number of physical units at the location
        gender: Gender designation

    Example:
        >>> Facility(facility_id="wp-1", x=0.0, y=0.0, kind="water_pump", capacity=3)
    """

    model_config = ConfigDict(frozen=True)

    facility_id: str = Field(..., min_length=1)
    x: float
    y: float
    kind: FacilityKind
    capacity: int = Field(1, ge=1, description="Physical units at the location")
    gender: FacilityGender = FacilityGender.ALL

    @field_validator("x", "y")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("coordinates must be finite")
        return value


class DecayKernel(BaseModel):
    """
    Truncated Gaussian distance decay.

    Attributes:
        sigma: Decay scale in meters (weight e^-1 at d = sigma)
        d0: Catchment threshold in meters
    """

    model_config = ConfigDict(frozen=True)

    sigma: float = Field(402.0, gt=0)
    d0: float = Field(1609.0, gt=0)


class ScenarioConfig(BaseModel):
    """
    Gender scenario settings.

    Attributes:
        gender_stream: Which population stream to compute
        allgender_factor: Share of all-gender capacity usable by the female stream
    """

    model_config = ConfigDict(frozen=True)

    gender_stream: GenderStream = GenderStream.TOTAL
    allgender_factor: float = Field(1.0, gt=0.0, le=1.0)


class MaskSearchConfig(BaseModel):
    """Alignment search ranges for binary masks."""

    model_config = ConfigDict(frozen=True)

    translation_range: int = Field(8, ge=0, description="R_t in pixels")
    rotation_range: float = Field(5.0, ge=0.0, description="R_r in degrees")
    rotation_step: float = Field(1.0, gt=0.0, description="Angular step in degrees")
    connectivity: int = Field(8, description="4 or 8")

    @field_validator("connectivity")
    @classmethod
    def _connectivity(cls, value: int) -> int:
        if value not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        return value


class RunConfig(BaseModel):
    """
    Complete configuration of one pipeline run.

    Every field mirrors a CLI flag and a key of config/config.example.yaml.

    Example:
        >>> cfg = RunConfig(d0=1609, sigma=402, distance_mode="euclidean")
        >>> cfg.kernel_for(FacilityKind.LATRINE).d0
        1609.0
    """

    cell_size: float = Field(50.0, gt=0)
    d0: float = Field(1609.0, gt=0)
    sigma: float = Field(402.0, gt=0)
    d0_by_kind: Dict[FacilityKind, float] = Field(default_factory=dict)
    distance_mode: DistanceMode = DistanceMode.NETWORK
    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    kinds: List[FacilityKind] = Field(
        default_factory=lambda: list(FacilityKind),
        min_length=1,
    )
    snap_tolerance: float = Field(0.5, ge=0)
    workers: int = Field(4, ge=1)
    batch_size: int = Field(64, ge=1)
    strict: bool = False
    masks: MaskSearchConfig = Field(default_factory=MaskSearchConfig)

    aoi_path: Optional[str] = None
    camps_path: Optional[str] = None
    population_csv_path: Optional[str] = None
    facilities_path: Optional[str] = None
    footpaths_path: Optional[str] = None
    shelters_path: Optional[str] = None
    blocks_path: Optional[str] = None
    output_dir: str = Field("output", min_length=1)

    @field_validator("d0_by_kind")
    @classmethod
    def _positive_overrides(cls, value: Dict[FacilityKind, float]) -> Dict[FacilityKind, float]:
        for kind, d0 in value.items():
            if d0 <= 0:
                raise ValueError(f"d0 override for {kind.value} must be > 0")
        return value

    @field_validator(
        "aoi_path",
        "camps_path",
        "population_csv_path",
        "facilities_path",
        "footpaths_path",
        "shelters_path",
        "blocks_path",
    )
    @classmethod
    def _non_empty_path(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and not value.strip():
            raise ValueError("paths must be non-empty")
        return value

    @model_validator(mode="after")
    def _unique_kinds(self) -> "RunConfig":
        seen = []
        for kind in self.kinds:
            if kind not in seen:
                seen.append(kind)
        # Keep the canonical kind order regardless of how they were listed
        self.kinds = [kind for kind in FacilityKind if kind in seen]
        return self

    def kernel_for(self, kind: FacilityKind) -> DecayKernel:
        """Decay kernel for one facility kind, honoring per-kind d0 overrides."""
        return DecayKernel(sigma=self.sigma, d0=self.d0_by_kind.get(kind, self.d0))

    @property
    def max_d0(self) -> float:
        return max([self.d0, *self.d0_by_kind.values()])


__all__ = [
    "FacilityKind",
    "FacilityGender",
    "GenderStream",
    "DistanceMode",
    "KIND_COLUMNS",
    "Facility",
    "DecayKernel",
    "ScenarioConfig",
    "MaskSearchConfig",
    "RunConfig",
]
