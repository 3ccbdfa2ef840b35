"""
WashAccess Core Module

This module provides the core abstractions shared by every layer:
validated schemas, error types, the distance-model base class and its factory.
"""

from core.base import BaseDistanceModel
from core.errors import WashAccessError
from core.factory import DistanceModelFactory
from core.schema import (
    DecayKernel,
    DistanceMode,
    Facility,
    FacilityGender,
    FacilityKind,
    GenderStream,
    RunConfig,
    ScenarioConfig,
)

__all__ = [
    "BaseDistanceModel",
    "DistanceModelFactory",
    "WashAccessError",
    "DecayKernel",
    "DistanceMode",
    "Facility",
    "FacilityGender",
    "FacilityKind",
    "GenderStream",
    "RunConfig",
    "ScenarioConfig",
]
