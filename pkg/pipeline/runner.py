"""
Pipeline Runner Module.

This module chains the library stages into the runs the CLI exposes:
grid -> allocate -> network -> access, then compare and validate on the
written fields. Each stage writes its own intermediate files so it can be
re-run on its own.

Functions:
    build_demand: Grid the AOI and apportion camp populations
    build_distance_model: Distance model named by the run configuration
    run_access: One scenario end to end, with fields, summaries and diagnostics
    run_compare: Change field (or female - male gap) and block deltas between two fields
    run_camp_units: Camp population and facility densities between two epochs
    run_validate: Spearman correlation between camp means and survey figures
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.sparse.csgraph import connected_components

from accessibility.blocks import Block, BlockSummary, aggregate_blocks, compare_blocks, empty_blocks
from accessibility.field import (
    AccessField,
    camp_average,
    change_field,
    gender_gap,
    mean_summary,
    people_per_facility,
)
from accessibility.inventory import KindInventory, facility_inventory
from accessibility.scenario import ScenarioResult, run_scenario
from accessibility.stats import spearman
from core.base import BaseDistanceModel
from core.errors import DatasetError, UndefinedStatisticError
from core.factory import DistanceModelFactory
from core.logger import STAGE, get_logger
from core.schema import DistanceMode, Facility, RunConfig
from demography.allocation import Camp, PopulationField, allocate_population
from demography.units import CampUnitChange, camp_unit_change
from geo.grid import build_grid, centroid_array
from network.graph import PedestrianNetwork, build_network
from network.snapping import snap_many
from pipeline.dataset import Dataset
from pipeline.writers import (
    file_tag,
    write_blocks_csv,
    write_field_csv,
    write_field_geojson,
    write_json,
    write_table_csv,
)

logger = get_logger(__name__)

SUMMARY_COLUMNS = ["column", "mean_A", "population_weighted_A", "people_per_facility"]
CAMP_UNIT_COLUMNS = [
    "camp_id",
    "area_km2",
    "population_density_a",
    "population_density_b",
    "population_density_change",
    "facility_density_a",
    "facility_density_b",
    "facility_density_change",
]


class NetworkSummary(BaseModel):
    """Size and connectivity of a built pedestrian network."""

    n_vertices: int
    n_edges: int
    total_length: float
    dropped_segments: int
    n_components: int


class RunDiagnostics(BaseModel):
    """Everything a run could not serve, written next to the fields."""

    tag: str
    distance_mode: str
    n_cells: int
    n_facilities: int
    n_pairs: int
    zero_demand: Dict[str, List[str]] = Field(default_factory=dict)
    unreached_cells: Dict[str, int] = Field(default_factory=dict)
    empty_kinds: List[str] = Field(default_factory=list)
    empty_blocks: List[str] = Field(default_factory=list)
    dropped_segments: int = 0
    inventory: Dict[str, KindInventory] = Field(default_factory=dict)


@dataclass
class AccessRun:
    result: ScenarioResult
    summary: List[Dict[str, float]]
    blocks: List[BlockSummary]
    camps: Dict[str, Dict[str, Optional[float]]]
    diagnostics: RunDiagnostics
    outputs: Dict[str, Path] = field(default_factory=dict)

    @property
    def access(self) -> AccessField:
        return self.result.field


@dataclass
class CompareRun:
    """`change` holds b - a, or female - male for a gender-gap comparison."""

    change: AccessField
    blocks: List[BlockSummary]
    outputs: Dict[str, Path] = field(default_factory=dict)


@dataclass
class CampUnitsRun:
    rows: List[CampUnitChange]
    outputs: Dict[str, Path] = field(default_factory=dict)


class ValidationResult(BaseModel):
    rho: float
    n_camps: int
    scatter_path: Optional[str] = None


def build_demand(cfg: RunConfig, dataset: Dataset) -> PopulationField:
    """
    Grid the AOI and apportion every camp's population to the cells.

    Raises:
        DatasetError: If the AOI, camps or shelters are missing
    """
    dataset.require("aoi", "camps", "shelters")
    logger.log(STAGE, "Stage grid")
    spec, cells = build_grid(dataset.aoi, cfg.cell_size)
    logger.log(STAGE, "Stage allocate")
    return allocate_population(spec, cells, dataset.camps, dataset.shelters)


def build_pedestrian_network(cfg: RunConfig, dataset: Dataset) -> PedestrianNetwork:
    dataset.require("footpaths")
    logger.log(STAGE, "Stage network")
    return build_network(dataset.footpaths, snap_tolerance=cfg.snap_tolerance)


def network_summary(net: PedestrianNetwork) -> NetworkSummary:
    n_components, _ = connected_components(net.to_csr(), directed=False)
    return NetworkSummary(
        n_vertices=net.n_vertices,
        n_edges=net.n_edges,
        total_length=float(net.lengths.sum()),
        dropped_segments=net.dropped_segments,
        n_components=int(n_components),
    )


def facility_snaps(net: PedestrianNetwork, dataset: Dataset) -> List[Dict[str, object]]:
    """Snap position and offset of every facility, for the network stage output."""
    if not dataset.facilities:
        return []
    xy = np.array([(f.x, f.y) for f in dataset.facilities], dtype=float)
    return [
        {
            "facility_id": facility.facility_id,
            "kind": facility.kind.value,
            "edge_id": snap.edge_id,
            "offset": snap.offset,
            "anchor_x": snap.anchor_x,
            "anchor_y": snap.anchor_y,
        }
        for facility, snap in zip(dataset.facilities, snap_many(xy, net))
    ]


def build_distance_model(
    cfg: RunConfig, dataset: Dataset, network: Optional[PedestrianNetwork] = None
) -> BaseDistanceModel:
    """Distance model for `cfg.distance_mode`; network mode builds the graph unless given one."""
    if cfg.distance_mode == DistanceMode.EUCLIDEAN:
        return DistanceModelFactory.create_model(cfg.distance_mode.value)
    network = network or build_pedestrian_network(cfg, dataset)
    return DistanceModelFactory.create_model(
        cfg.distance_mode.value,
        network=network,
        workers=cfg.workers,
        batch_size=cfg.batch_size,
    )


def _summary_rows(field_: AccessField) -> List[Dict[str, float]]:
    weights = field_.population.total if field_.population is not None else None
    plain = mean_summary(field_)
    weighted = mean_summary(field_, population=weights)
    return [
        {
            "column": column,
            "mean_A": plain[column],
            "population_weighted_A": weighted[column],
            "people_per_facility": people_per_facility(plain[column]),
        }
        for column in plain
    ]


def camp_summaries(
    field_: AccessField, camps: Sequence[Camp]
) -> Dict[str, Dict[str, Optional[float]]]:
    """Cell-mean and population-weighted A_mean per camp."""
    by_cell = camp_average(field_, camps, reducer="cell")
    by_pop = (
        camp_average(field_, camps, reducer="population")
        if field_.population is not None
        else {camp.camp_id: None for camp in camps}
    )
    return {
        camp.camp_id: {"cell_mean": by_cell[camp.camp_id], "population_mean": by_pop[camp.camp_id]}
        for camp in camps
    }


def run_access(
    cfg: RunConfig,
    dataset: Dataset,
    demand: Optional[PopulationField] = None,
    output_dir: Optional[Union[str, Path]] = None,
    network: Optional[PedestrianNetwork] = None,
) -> AccessRun:
    """
    Compute one scenario and write its result files.

    Files (prefixed by the scenario tag) under `output_dir`:
    access_<tag>.csv, access_<tag>.geojson, summary_<tag>.csv,
    diagnostics_<tag>.json, plus blocks_<tag>.csv and camps_<tag>.csv when
    blocks or camps are present.

    Args:
        cfg: Run configuration
        dataset: Loaded input layers
        demand: Precomputed population field; built from the dataset if None
        output_dir: Where to write; cfg.output_dir if None, nothing if ""
        network: Prebuilt pedestrian network for network mode

    Returns:
        AccessRun holding the field, summaries and diagnostics
    """
    demand = demand if demand is not None else build_demand(cfg, dataset)
    if not dataset.facilities:
        logger.warning("The facility layer is empty; every accessibility value is zero")

    if cfg.distance_mode == DistanceMode.NETWORK:
        network = network or build_pedestrian_network(cfg, dataset)
    model = build_distance_model(cfg, dataset, network=network)

    logger.log(STAGE, f"Stage distances ({model.name}, cutoff {cfg.max_d0:g} m)")
    supply_xy = np.array([(f.x, f.y) for f in dataset.facilities], dtype=float).reshape(-1, 2)
    pairs = model.catchment_pairs(centroid_array(demand.cells), supply_xy, cfg.max_d0)
    logger.info(f"{len(pairs)} demand-facility pairs within {cfg.max_d0:g} m")

    logger.log(STAGE, "Stage access")
    result = run_scenario(
        cfg.scenario,
        dataset.facilities,
        demand,
        pairs,
        {kind: cfg.kernel_for(kind) for kind in cfg.kinds},
        has_gender_metadata=dataset.has_gender_metadata,
    )
    field_ = result.field

    blocks = aggregate_blocks(field_, dataset.blocks) if dataset.blocks else []
    camps = camp_summaries(field_, dataset.camps) if dataset.camps else {}
    diagnostics = RunDiagnostics(
        tag=field_.tag,
        distance_mode=model.name,
        n_cells=len(demand),
        n_facilities=len(dataset.facilities),
        n_pairs=len(pairs),
        zero_demand={k.value: ids for k, ids in result.diagnostics.zero_demand.items()},
        unreached_cells={k.value: n for k, n in result.diagnostics.unreached_cells.items()},
        empty_kinds=[k.value for k in result.diagnostics.empty_kinds],
        empty_blocks=empty_blocks(blocks),
        dropped_segments=network.dropped_segments if network is not None else 0,
        inventory={k.value: inv for k, inv in facility_inventory(dataset.facilities).items()},
    )
    run = AccessRun(
        result=result,
        summary=_summary_rows(field_),
        blocks=blocks,
        camps=camps,
        diagnostics=diagnostics,
    )

    out = cfg.output_dir if output_dir is None else output_dir
    if out:
        run.outputs = write_access_outputs(run, Path(out))
    return run


def write_access_outputs(run: AccessRun, output_dir: Path) -> Dict[str, Path]:
    tag = file_tag(run.access.tag)
    outputs = {
        "field_csv": write_field_csv(run.access, output_dir / f"access_{tag}.csv"),
        "field_geojson": write_field_geojson(run.access, output_dir / f"access_{tag}.geojson"),
        "summary": write_table_csv(run.summary, SUMMARY_COLUMNS, output_dir / f"summary_{tag}.csv"),
        "diagnostics": write_json(
            run.diagnostics.model_dump(mode="json"), output_dir / f"diagnostics_{tag}.json"
        ),
    }
    if run.blocks:
        outputs["blocks"] = write_blocks_csv(run.blocks, output_dir / f"blocks_{tag}.csv")
    if run.camps:
        rows = [{"camp_id": camp_id, **values} for camp_id, values in run.camps.items()]
        outputs["camps"] = write_table_csv(
            rows, ["camp_id", "cell_mean", "population_mean"], output_dir / f"camps_{tag}.csv"
        )
    return outputs


def run_compare(
    field_a: AccessField,
    field_b: AccessField,
    blocks: Sequence[Block] = (),
    output_dir: Optional[Union[str, Path]] = None,
    column: str = "A_mean",
    mode: Literal["change", "gender_gap"] = "change",
) -> CompareRun:
    """
    Per-cell difference of two fields and per-block deltas.

    With mode "change" the fields are two epochs and the difference is b - a.
    With mode "gender_gap" they are the female and male fields of one epoch
    and the difference is female - male; block means are then the female
    ones with the gap as delta.

    Raises:
        GridMismatchError: If the fields were built on different grids
        ValueError: If the mode is unknown
    """
    if mode == "change":
        difference = change_field(field_a, field_b)
        summaries = compare_blocks(field_a, field_b, blocks, column) if blocks else []
    elif mode == "gender_gap":
        difference = gender_gap(field_a, field_b)
        summaries = compare_blocks(field_b, field_a, blocks, column) if blocks else []
    else:
        raise ValueError(f"Unknown compare mode: '{mode}'")
    logger.log(STAGE, f"Stage compare {mode} ({field_a.tag}, {field_b.tag})")

    run = CompareRun(change=difference, blocks=summaries)
    if output_dir:
        out = Path(output_dir)
        run.outputs[f"{mode}_csv"] = write_field_csv(difference, out / f"{mode}.csv")
        run.outputs[f"{mode}_geojson"] = write_field_geojson(difference, out / f"{mode}.geojson")
        if summaries:
            run.outputs["blocks"] = write_blocks_csv(summaries, out / f"blocks_{mode}.csv")
    return run


def run_camp_units(
    camps_a: Sequence[Camp],
    camps_b: Sequence[Camp],
    facilities_a: Sequence[Facility],
    facilities_b: Sequence[Facility],
    output_dir: Optional[Union[str, Path]] = None,
) -> CampUnitsRun:
    """Camp-level densities of epochs a and b, written to camp_units.csv."""
    logger.log(STAGE, f"Stage camp units ({len(camps_a)} camps)")
    rows = camp_unit_change(camps_a, camps_b, facilities_a, facilities_b)
    run = CampUnitsRun(rows=rows)
    if output_dir:
        table = [
            {
                **row.model_dump(),
                "population_density_change": row.population_density_change,
                "facility_density_change": row.facility_density_change,
            }
            for row in rows
        ]
        run.outputs["camp_units"] = write_table_csv(
            table, CAMP_UNIT_COLUMNS, Path(output_dir) / "camp_units.csv"
        )
    return run


def read_survey(path: Union[str, Path]) -> Dict[str, float]:
    """camp_id -> surveyed people per facility."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"file not found: {path}", layer="survey")
    frame = pd.read_csv(path, dtype={"camp_id": str})
    missing = {"camp_id", "people_per_facility"} - set(frame.columns)
    if missing:
        raise DatasetError(f"missing columns: {', '.join(sorted(missing))}", layer="survey")
    values = pd.to_numeric(frame["people_per_facility"], errors="coerce")
    bad = frame.index[values.isna() & frame["people_per_facility"].notna()]
    if len(bad):
        raise DatasetError(
            "people_per_facility must be numeric", layer="survey", feature_id=f"line {int(bad[0]) + 2}"
        )
    return {
        camp_id: float(value)
        for camp_id, value in zip(frame["camp_id"], values)
        if not math.isnan(value)
    }


def run_validate(
    camp_values: Mapping[str, Optional[float]],
    survey: Union[str, Path, Mapping[str, float]],
    output_dir: Optional[Union[str, Path]] = None,
) -> ValidationResult:
    """
    Spearman's rho between camp accessibility and surveyed people per facility.

    A well-behaved field correlates negatively: more access, fewer people
    per facility.

    Raises:
        UndefinedStatisticError: With fewer than 3 camps carrying both values,
            or a constant series
    """
    figures = survey if isinstance(survey, Mapping) else read_survey(survey)
    rows = [
        {"camp_id": camp_id, "accessibility": float(a), "people_per_facility": float(figures[camp_id])}
        for camp_id, a in sorted(camp_values.items())
        if a is not None and math.isfinite(a) and camp_id in figures and math.isfinite(figures[camp_id])
    ]
    if len(rows) < 3:
        raise UndefinedStatisticError(
            f"Validation needs at least 3 camps with both values, got {len(rows)}"
        )
    rho = spearman([r["accessibility"] for r in rows], [r["people_per_facility"] for r in rows])
    logger.info(f"Spearman rho = {rho:.3f} over {len(rows)} camps")

    result = ValidationResult(rho=rho, n_camps=len(rows))
    if output_dir:
        path = write_table_csv(
            rows, ["camp_id", "accessibility", "people_per_facility"], Path(output_dir) / "validation.csv"
        )
        result.scatter_path = str(path)
    return result


__all__ = [
    "NetworkSummary",
    "RunDiagnostics",
    "AccessRun",
    "CompareRun",
    "ValidationResult",
    "build_demand",
    "build_pedestrian_network",
    "network_summary",
    "facility_snaps",
    "build_distance_model",
    "camp_summaries",
    "run_access",
    "write_access_outputs",
    "run_compare",
    "read_survey",
    "run_validate",
]
