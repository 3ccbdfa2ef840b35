"""Input loading, stage orchestration and result files."""

from pipeline.dataset import Dataset, load_dataset
from pipeline.runner import (
    AccessRun,
    CampUnitsRun,
    CompareRun,
    NetworkSummary,
    RunDiagnostics,
    ValidationResult,
    build_demand,
    build_distance_model,
    build_pedestrian_network,
    network_summary,
    run_access,
    run_camp_units,
    run_compare,
    run_validate,
)
from pipeline.writers import FIELD_COLUMNS, read_field, write_field_csv, write_field_geojson

__all__ = [
    "Dataset",
    "load_dataset",
    "AccessRun",
    "CampUnitsRun",
    "CompareRun",
    "NetworkSummary",
    "RunDiagnostics",
    "ValidationResult",
    "build_demand",
    "build_distance_model",
    "build_pedestrian_network",
    "network_summary",
    "run_access",
    "run_camp_units",
    "run_compare",
    "run_validate",
    "FIELD_COLUMNS",
    "read_field",
    "write_field_csv",
    "write_field_geojson",
]
