"""
Gender scenarios on top of the 2SFCA steps.

A run picks one population stream. The total stream uses every facility at
full capacity with total population as demand. A gender stream uses the
facilities designated for that gender plus the all-gender ones; demand at
all-gender facilities is the total population while designated facilities
only see their own gender. For the female stream, all-gender capacity is
scaled by `allgender_factor` (women and girls reluctant to use shared
facilities); the male stream never is.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence

import numpy as np

from accessibility.distances import CatchmentPairs
from accessibility.fca import ProviderRatios, accessibility_scores, provider_ratios, unreached_cells
from accessibility.field import AccessField
from core.errors import ScenarioError
from core.logger import STAGE, get_logger
from core.schema import (
    DecayKernel,
    Facility,
    FacilityGender,
    FacilityKind,
    GenderStream,
    ScenarioConfig,
)
from demography.allocation import PopulationField

logger = get_logger(__name__)

# Columns of the stacked demand matrix
_TOTAL, _STREAM = 0, 1


@dataclass
class ScenarioDiagnostics:
    """What a scenario run could not serve."""

    zero_demand: Dict[FacilityKind, List[str]] = field(default_factory=dict)
    unreached_cells: Dict[FacilityKind, int] = field(default_factory=dict)
    empty_kinds: List[FacilityKind] = field(default_factory=list)


@dataclass
class ScenarioResult:
    field: AccessField
    ratios: Dict[FacilityKind, ProviderRatios]
    diagnostics: ScenarioDiagnostics


def scenario_tag(cfg: ScenarioConfig) -> str:
    if cfg.gender_stream == GenderStream.FEMALE:
        return f"female_{cfg.allgender_factor:g}"
    return cfg.gender_stream.value


def effective_supply(
    facilities: Sequence[Facility], cfg: ScenarioConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Facilities usable by the scenario's stream.

    Returns:
        (indices into `facilities`, effective capacities, demand column per facility)
    """
    stream = cfg.gender_stream
    if stream == GenderStream.TOTAL:
        idx = np.arange(len(facilities), dtype=np.int64)
        capacity = np.array([f.capacity for f in facilities], dtype=float)
        return idx, capacity, np.full(len(idx), _TOTAL, dtype=np.int64)

    own = FacilityGender(stream.value)
    idx, capacity, column = [], [], []
    for k, facility in enumerate(facilities):
        if facility.gender == FacilityGender.ALL:
            scale = cfg.allgender_factor if stream == GenderStream.FEMALE else 1.0
            idx.append(k)
            capacity.append(facility.capacity * scale)
            column.append(_TOTAL)
        elif facility.gender == own:
            idx.append(k)
            capacity.append(float(facility.capacity))
            column.append(_STREAM)
    return (
        np.asarray(idx, dtype=np.int64),
        np.asarray(capacity, dtype=float),
        np.asarray(column, dtype=np.int64),
    )


def run_scenario(
    cfg: ScenarioConfig,
    facilities: Sequence[Facility],
    demand: PopulationField,
    pairs: CatchmentPairs,
    kernels: Mapping[FacilityKind, DecayKernel],
    has_gender_metadata: bool = True,
) -> ScenarioResult:
    """
    Accessibility field per kind for one scenario.

    Args:
        cfg: Stream and all-gender factor
        facilities: All facilities; `pairs` columns index this sequence
        demand: Population per cell; `pairs` rows index its cells
        pairs: Catchment pairs computed up to the largest d0 of `kernels`
        kernels: Decay kernel per kind; the kinds to compute are its keys
        has_gender_metadata: False when the facility layer carried no gender designation

    Returns:
        ScenarioResult with the field (mean over the computed kinds available
        as `field.mean`), step-1 ratios and diagnostics

    Raises:
        ScenarioError: If a gender stream is requested without gender data
    """
    stream = cfg.gender_stream
    if pairs.shape != (len(demand), len(facilities)):
        raise ValueError(
            f"catchment pairs have shape {pairs.shape}, expected {(len(demand), len(facilities))}"
        )
    if stream != GenderStream.TOTAL:
        if not has_gender_metadata:
            raise ScenarioError(
                f"The {stream.value} stream needs gender-designated facility data"
            )
        if demand.mass(stream.value) == 0 and demand.mass("total") > 0:
            raise ScenarioError(f"No {stream.value} population figures to compute the stream from")

    tag = scenario_tag(cfg)
    logger.log(STAGE, f"Scenario {tag}: {len(facilities)} facilities, {len(demand)} cells")
    population = np.column_stack([demand.total, demand.stream(stream.value)])

    selected, capacity, column = effective_supply(facilities, cfg)
    kinds_of = np.array([facilities[k].kind for k in selected], dtype=object)

    values: Dict[FacilityKind, np.ndarray] = {}
    ratios: Dict[FacilityKind, ProviderRatios] = {}
    diagnostics = ScenarioDiagnostics()
    for kind in (k for k in FacilityKind if k in kernels):
        in_kind = np.flatnonzero(kinds_of == kind) if len(selected) else np.zeros(0, dtype=np.int64)
        if len(in_kind) == 0:
            logger.warning(f"No {kind.value} facilities for the {tag} scenario; field is zero")
            values[kind] = np.zeros(len(demand))
            diagnostics.empty_kinds.append(kind)
            diagnostics.unreached_cells[kind] = len(demand)
            continue

        supply_idx = selected[in_kind]
        weights = pairs.select_supply(supply_idx).kernel_matrix(kernels[kind])
        step1 = provider_ratios(
            capacity[in_kind],
            population,
            weights,
            demand_column=column[in_kind],
            facility_ids=[facilities[k].facility_id for k in supply_idx],
        )
        values[kind] = accessibility_scores(step1, weights)
        ratios[kind] = step1
        diagnostics.zero_demand[kind] = step1.zero_demand_ids
        diagnostics.unreached_cells[kind] = len(unreached_cells(weights))

    access = AccessField(
        spec=demand.spec,
        cells=demand.cells,
        values=values,
        stream=stream,
        tag=tag,
        population=demand,
    )
    return ScenarioResult(field=access, ratios=ratios, diagnostics=diagnostics)


__all__ = [
    "ScenarioDiagnostics",
    "ScenarioResult",
    "scenario_tag",
    "effective_supply",
    "run_scenario",
]
