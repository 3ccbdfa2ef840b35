"""
Input layers of a run.

All vector layers are GeoJSON FeatureCollections in a projected, metric
CRS:

- aoi: polygon(s); defaults to the union of camp boundaries
- camps: polygons with camp_id, pop_total, pop_female, pop_male
- facilities: points with facility_id, kind, gender (optional), count (optional, S_j)
- footpaths: (multi)line strings
- shelters: footprint polygons, or a CSV with row, col, shelter_area per grid cell
- blocks: polygons with block_id

Camp populations can also come from a CSV keyed by camp_id.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import pandas as pd
import shapely
from pydantic import ValidationError
from shapely.errors import GEOSException
from shapely.geometry import LineString, MultiLineString, shape
from shapely.validation import explain_validity

from accessibility.blocks import Block
from core.errors import DatasetError, WashAccessError
from core.logger import get_logger
from core.schema import Facility, RunConfig
from demography.allocation import Camp, ShelterSet
from geo.primitives import Areal

logger = get_logger(__name__)

_GEOGRAPHIC_CRS = ("4326", "CRS84", "crs84")


@dataclass
class Dataset:
    """Validated in-memory input layers."""

    aoi: Optional[Areal] = None
    camps: List[Camp] = field(default_factory=list)
    facilities: List[Facility] = field(default_factory=list)
    footpaths: List[LineString] = field(default_factory=list)
    shelters: ShelterSet = field(default_factory=ShelterSet)
    blocks: List[Block] = field(default_factory=list)
    has_gender_metadata: bool = False

    def require(self, *layers: str) -> None:
        """Raise DatasetError naming the first empty layer among `layers`."""
        for layer in layers:
            value = getattr(self, layer)
            if isinstance(value, ShelterSet):
                empty = not value.is_raster and len(value.footprints) == 0
            else:
                empty = value is None or (isinstance(value, list) and not value)
            if empty:
                raise DatasetError("layer is required for this command but empty or missing", layer=layer)


def _read_features(path: str, layer: str) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
    file_path = Path(path)
    if not file_path.exists():
        raise DatasetError(f"file not found: {file_path}", layer=layer)
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise DatasetError(f"{file_path} is not valid JSON: {e}", layer=layer) from e

    if document.get("type") == "FeatureCollection":
        features = document.get("features") or []
    elif document.get("type") == "Feature":
        features = [document]
    else:
        raise DatasetError(f"{file_path} is not a GeoJSON FeatureCollection", layer=layer)
    return features, document


def _feature_id(feature: Dict[str, Any], index: int, key: Optional[str] = None) -> str:
    props = feature.get("properties") or {}
    if key and props.get(key) not in (None, ""):
        return str(props[key])
    if feature.get("id") not in (None, ""):
        return str(feature["id"])
    return str(index + 1)


def _iter_geometries(
    features: List[Dict[str, Any]], layer: str, id_key: Optional[str] = None
) -> Iterator[Tuple[str, Dict[str, Any], Any]]:
    for index, feature in enumerate(features):
        fid = _feature_id(feature, index, id_key)
        if not feature.get("geometry"):
            raise DatasetError("feature has no geometry", layer=layer, feature_id=fid)
        try:
            geom = shape(feature["geometry"])
        except (ValueError, TypeError, KeyError, AttributeError, GEOSException) as e:
            raise DatasetError(f"malformed geometry: {e}", layer=layer, feature_id=fid) from e
        yield fid, feature.get("properties") or {}, geom


def _warn_if_geographic(document: Dict[str, Any], bounds: Tuple[float, ...], layer: str) -> None:
    crs_name = str(((document.get("crs") or {}).get("properties") or {}).get("name", ""))
    looks_geographic = any(tag in crs_name for tag in _GEOGRAPHIC_CRS)
    if not crs_name and bounds and all(math.isfinite(b) for b in bounds):
        minx, miny, maxx, maxy = bounds
        looks_geographic = -180 <= minx <= maxx <= 180 and -90 <= miny <= maxy <= 90
    if looks_geographic:
        logger.warning(
            f"{layer}: coordinates look geographic (degrees); distances assume a metric CRS"
        )


def _areal(geom, layer: str, fid: str) -> Areal:
    if geom.geom_type not in ("Polygon", "MultiPolygon"):
        raise DatasetError(f"expected a polygon, got {geom.geom_type}", layer=layer, feature_id=fid)
    if not geom.is_valid:
        raise DatasetError(
            f"invalid polygon: {explain_validity(geom)}", layer=layer, feature_id=fid
        )
    return geom


def _number(props: Dict[str, Any], key: str, layer: str, fid: str, default: Any = None) -> Any:
    value = props.get(key)
    if value is None:
        return default
    try:
        return float(value)
    except (TypeError, ValueError) as e:
        raise DatasetError(f"{key} must be numeric, got {value!r}", layer=layer, feature_id=fid) from e


def load_camps(path: str) -> List[Camp]:
    features, document = _read_features(path, "camps")
    camps: List[Camp] = []
    for fid, props, geom in _iter_geometries(features, "camps", id_key="camp_id"):
        boundary = _areal(geom, "camps", fid)
        try:
            camps.append(
                Camp(
                    camp_id=fid,
                    boundary=boundary,
                    pop_total=_number(props, "pop_total", "camps", fid, 0.0),
                    pop_female=_number(props, "pop_female", "camps", fid, 0.0),
                    pop_male=_number(props, "pop_male", "camps", fid, 0.0),
                )
            )
        except WashAccessError as e:
            raise DatasetError(str(e), layer="camps", feature_id=fid) from e
    if camps:
        _warn_if_geographic(document, tuple(shapely.total_bounds([c.boundary for c in camps])), "camps")
    return camps


def apply_population_csv(camps: List[Camp], path: str) -> List[Camp]:
    """
    Replace camp populations with the figures of a CSV keyed by camp_id.

    Raises:
        DatasetError: For missing columns, non-numeric values (with line number)
            or camp ids without a boundary
    """
    file_path = Path(path)
    if not file_path.exists():
        raise DatasetError(f"file not found: {file_path}", layer="population")
    frame = pd.read_csv(file_path, dtype={"camp_id": str})
    missing = {"camp_id", "pop_total"} - set(frame.columns)
    if missing:
        raise DatasetError(f"missing columns: {', '.join(sorted(missing))}", layer="population")

    by_id = {camp.camp_id: camp for camp in camps}
    figures: Dict[str, Dict[str, float]] = {}
    for offset, row in enumerate(frame.to_dict("records")):
        line = offset + 2
        camp_id = str(row["camp_id"])
        if camp_id not in by_id:
            raise DatasetError(f"unknown camp_id {camp_id}", layer="population", feature_id=f"line {line}")
        values = {}
        for key in ("pop_total", "pop_female", "pop_male"):
            raw = row.get(key, 0.0)
            try:
                value = 0.0 if raw is None or (isinstance(raw, float) and math.isnan(raw)) else float(raw)
            except (TypeError, ValueError) as e:
                raise DatasetError(
                    f"{key} must be numeric, got {raw!r}", layer="population", feature_id=f"line {line}"
                ) from e
            values[key] = value
        figures[camp_id] = values

    updated = []
    for camp in camps:
        values = figures.get(camp.camp_id)
        if values is None:
            logger.warning(f"Camp {camp.camp_id} has no row in {file_path.name}; keeping its properties")
            updated.append(camp)
            continue
        try:
            updated.append(Camp(camp_id=camp.camp_id, boundary=camp.boundary, **values))
        except WashAccessError as e:
            raise DatasetError(str(e), layer="population", feature_id=camp.camp_id) from e
    return updated


def load_facilities(path: str) -> Tuple[List[Facility], bool]:
    """
    Facilities and whether any of them carried a gender designation.

    Raises:
        DatasetError: For non-point geometry, unknown kind or gender, duplicate
            ids or a count below 1, naming the feature
    """
    features, document = _read_features(path, "facilities")
    facilities: List[Facility] = []
    seen: Dict[str, int] = {}
    has_gender = False
    for fid, props, geom in _iter_geometries(features, "facilities", id_key="facility_id"):
        if geom.geom_type != "Point":
            raise DatasetError(f"expected a point, got {geom.geom_type}", layer="facilities", feature_id=fid)
        if fid in seen:
            raise DatasetError("duplicate facility id", layer="facilities", feature_id=fid)
        seen[fid] = 1
        has_gender = has_gender or props.get("gender") not in (None, "")
        try:
            facilities.append(
                Facility(
                    facility_id=fid,
                    x=geom.x,
                    y=geom.y,
                    kind=props.get("kind"),
                    gender=props.get("gender") or "all",
                    capacity=props.get("count", 1),
                )
            )
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
            )
            raise DatasetError(problems, layer="facilities", feature_id=fid) from e
    if facilities:
        xs = [f.x for f in facilities]
        ys = [f.y for f in facilities]
        _warn_if_geographic(document, (min(xs), min(ys), max(xs), max(ys)), "facilities")
    return facilities, has_gender


def load_footpaths(path: str) -> List[LineString]:
    features, _ = _read_features(path, "footpaths")
    lines: List[LineString] = []
    for fid, _, geom in _iter_geometries(features, "footpaths"):
        if isinstance(geom, LineString):
            lines.append(geom)
        elif isinstance(geom, MultiLineString):
            lines.extend(geom.geoms)
        else:
            raise DatasetError(f"expected a line, got {geom.geom_type}", layer="footpaths", feature_id=fid)
    return lines


def load_shelters(path: str) -> ShelterSet:
    """Footprint polygons from GeoJSON, or a per-cell area map from CSV."""
    if Path(path).suffix.lower() == ".csv":
        if not Path(path).exists():
            raise DatasetError(f"file not found: {path}", layer="shelters")
        frame = pd.read_csv(path)
        missing = {"row", "col", "shelter_area"} - set(frame.columns)
        if missing:
            raise DatasetError(f"missing columns: {', '.join(sorted(missing))}", layer="shelters")
        area_by_cell = {
            (int(r), int(c)): float(a)
            for r, c, a in zip(frame["row"], frame["col"], frame["shelter_area"])
        }
        return ShelterSet(area_by_cell=area_by_cell)

    features, _ = _read_features(path, "shelters")
    footprints = []
    for fid, _, geom in _iter_geometries(features, "shelters"):
        footprint = _areal(geom, "shelters", fid)
        if footprint.area <= 0:
            raise DatasetError("shelter footprint has zero area", layer="shelters", feature_id=fid)
        footprints.append(footprint)
    return ShelterSet(footprints=footprints)


def load_blocks(path: str) -> List[Block]:
    features, _ = _read_features(path, "blocks")
    blocks = []
    for fid, _, geom in _iter_geometries(features, "blocks", id_key="block_id"):
        blocks.append(Block(block_id=fid, boundary=_areal(geom, "blocks", fid)))
    return blocks


def load_aoi(path: str) -> Areal:
    features, _ = _read_features(path, "aoi")
    parts = [_areal(geom, "aoi", fid) for fid, _, geom in _iter_geometries(features, "aoi")]
    if not parts:
        raise DatasetError("no polygon in the area of interest", layer="aoi")
    return shapely.union_all(parts)


def _check_facilities_in_camps(dataset: Dataset, buffer: float, strict: bool) -> None:
    if not dataset.camps or not dataset.facilities:
        return
    zone = shapely.union_all([camp.boundary for camp in dataset.camps]).buffer(buffer)
    points = shapely.points([(f.x, f.y) for f in dataset.facilities])
    outside = [f.facility_id for f, ok in zip(dataset.facilities, shapely.covers(zone, points)) if not ok]
    if not outside:
        return
    message = f"{len(outside)} facilities lie outside every camp: {', '.join(outside[:10])}"
    if strict:
        raise DatasetError(message, layer="facilities", feature_id=outside[0])
    logger.warning(message)


LAYERS = ("aoi", "camps", "facilities", "footpaths", "shelters", "blocks")


def load_dataset(cfg: RunConfig, layers: Optional[Sequence[str]] = None) -> Dataset:
    """
    Load every layer whose path is set in the run configuration.

    Args:
        cfg: Run configuration holding the layer paths
        layers: Restrict loading to these layers (see LAYERS); all when None

    Returns:
        Dataset with layer counts logged

    Raises:
        DatasetError: On missing files, malformed geometry, unknown enums
    """
    wanted = set(LAYERS if layers is None else layers)
    unknown = wanted - set(LAYERS)
    if unknown:
        raise ValueError(f"Unknown layers: {', '.join(sorted(unknown))}")

    dataset = Dataset()
    if cfg.camps_path and wanted & {"camps", "aoi"}:
        dataset.camps = load_camps(cfg.camps_path)
        if cfg.population_csv_path:
            dataset.camps = apply_population_csv(dataset.camps, cfg.population_csv_path)
    if cfg.facilities_path and "facilities" in wanted:
        dataset.facilities, dataset.has_gender_metadata = load_facilities(cfg.facilities_path)
    if cfg.footpaths_path and "footpaths" in wanted:
        dataset.footpaths = load_footpaths(cfg.footpaths_path)
    if cfg.shelters_path and "shelters" in wanted:
        dataset.shelters = load_shelters(cfg.shelters_path)
    if cfg.blocks_path and "blocks" in wanted:
        dataset.blocks = load_blocks(cfg.blocks_path)

    if cfg.aoi_path and "aoi" in wanted:
        dataset.aoi = load_aoi(cfg.aoi_path)
    elif dataset.camps and "aoi" in wanted:
        dataset.aoi = shapely.union_all([camp.boundary for camp in dataset.camps])

    _check_facilities_in_camps(dataset, buffer=cfg.cell_size, strict=cfg.strict)

    shelter_count = (
        f"{len(dataset.shelters.area_by_cell)} cells"
        if dataset.shelters.is_raster
        else f"{len(dataset.shelters.footprints)} footprints"
    )
    logger.info(
        f"Loaded dataset: {len(dataset.camps)} camps, {len(dataset.facilities)} facilities, "
        f"{len(dataset.footpaths)} footpaths, {shelter_count}, {len(dataset.blocks)} blocks"
    )
    return dataset


__all__ = [
    "LAYERS",
    "Dataset",
    "load_dataset",
    "load_aoi",
    "load_camps",
    "apply_population_csv",
    "load_facilities",
    "load_footpaths",
    "load_shelters",
    "load_blocks",
]
