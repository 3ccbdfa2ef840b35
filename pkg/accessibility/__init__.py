"""2SFCA accessibility engine: kernels, catchments, scores, scenarios and summaries."""

from accessibility.blocks import Block, BlockSummary, aggregate_blocks, compare_blocks, empty_blocks
from accessibility.distances import CatchmentPairs, EuclideanDistanceModel, NetworkDistanceModel
from accessibility.fca import ProviderRatios, accessibility_scores, provider_ratios, unreached_cells
from accessibility.field import (
    AccessField,
    camp_average,
    change_field,
    gender_gap,
    mean_summary,
    people_per_facility,
)
from accessibility.inventory import KindInventory, facility_inventory
from accessibility.kernel import decay_weight, decay_weights
from accessibility.scenario import ScenarioDiagnostics, ScenarioResult, run_scenario, scenario_tag
from accessibility.stats import spearman

__all__ = [
    "Block",
    "BlockSummary",
    "aggregate_blocks",
    "compare_blocks",
    "empty_blocks",
    "CatchmentPairs",
    "EuclideanDistanceModel",
    "NetworkDistanceModel",
    "ProviderRatios",
    "accessibility_scores",
    "provider_ratios",
    "unreached_cells",
    "AccessField",
    "camp_average",
    "change_field",
    "gender_gap",
    "mean_summary",
    "people_per_facility",
    "KindInventory",
    "facility_inventory",
    "decay_weight",
    "decay_weights",
    "ScenarioDiagnostics",
    "ScenarioResult",
    "run_scenario",
    "scenario_tag",
    "spearman",
]
