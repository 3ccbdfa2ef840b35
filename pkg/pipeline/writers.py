"""
Result files.

Fields are written as CSV (fixed column order) and GeoJSON with every float
rounded to 9 significant digits, so reading a file back and writing it again
reproduces the same bytes.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from accessibility.blocks import BlockSummary
from accessibility.field import AccessField
from core.errors import DatasetError
from core.logger import get_logger
from core.schema import KIND_COLUMNS, GenderStream
from demography.allocation import PopulationField
from geo.grid import GridCell, GridSpec, cells_from_ids

logger = get_logger(__name__)

FIELD_COLUMNS = [
    "cell_id",
    "row",
    "col",
    "x",
    "y",
    "pop_total",
    "pop_female",
    "pop_male",
    "A_water",
    "A_latrine",
    "A_bath",
    "A_mean",
]
FLOAT_FORMAT = "%.9g"

PathLike = Union[str, Path]


def sig9(value: float) -> float:
    """Round to 9 significant digits, the precision of every written float."""
    return float(FLOAT_FORMAT % value)


def field_frame(field_: AccessField) -> pd.DataFrame:
    """One row per cell in FIELD_COLUMNS order; kinds not in the run are left empty."""
    n = len(field_)
    population = field_.population
    frame = pd.DataFrame(
        {
            "cell_id": field_.cell_ids,
            "row": [c.row for c in field_.cells],
            "col": [c.col for c in field_.cells],
            "x": [c.centroid.x for c in field_.cells],
            "y": [c.centroid.y for c in field_.cells],
            "pop_total": population.total if population is not None else np.full(n, np.nan),
            "pop_female": population.female if population is not None else np.full(n, np.nan),
            "pop_male": population.male if population is not None else np.full(n, np.nan),
        }
    )
    for kind, column in KIND_COLUMNS.items():
        frame[column] = field_.values[kind] if kind in field_.values else np.full(n, np.nan)
    frame["A_mean"] = field_.mean
    return frame[FIELD_COLUMNS]


def write_field_csv(field_: AccessField, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    field_frame(field_).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote field {field_.tag} ({len(field_)} cells) to {path}")
    return path


def _json_number(value: float) -> Optional[float]:
    if value is None or not np.isfinite(value):
        return None
    return sig9(float(value))


def write_field_geojson(field_: AccessField, path: PathLike) -> Path:
    """Cells as polygon features carrying the CSV columns as properties."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = field_frame(field_)
    features = []
    for cell, record in zip(field_.cells, frame.to_dict("records")):
        props: Dict[str, Any] = {"cell_id": record["cell_id"], "row": int(record["row"]), "col": int(record["col"])}
        for column in FIELD_COLUMNS[3:]:
            props[column] = _json_number(record[column])
        coords = [[sig9(x), sig9(y)] for x, y in cell.geometry.exterior.coords]
        features.append(
            {"type": "Feature", "geometry": {"type": "Polygon", "coordinates": [coords]}, "properties": props}
        )
    document = {
        "type": "FeatureCollection",
        "properties": {"tag": field_.tag, "stream": field_.stream.value, "cell_size": field_.spec.cell_size},
        "features": features,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, ensure_ascii=False)
        f.write("\n")
    logger.info(f"Wrote field {field_.tag} GeoJSON to {path}")
    return path


def _infer_spec(frame: pd.DataFrame, cell_size: Optional[float]) -> GridSpec:
    rows = frame["row"].to_numpy(dtype=np.int64)
    cols = frame["col"].to_numpy(dtype=np.int64)
    xs = frame["x"].to_numpy(dtype=float)
    ys = frame["y"].to_numpy(dtype=float)
    if cell_size is None:
        if len(np.unique(cols)) > 1:
            i, j = np.argmin(cols), np.argmax(cols)
            cell_size = (xs[j] - xs[i]) / (cols[j] - cols[i])
        elif len(np.unique(rows)) > 1:
            i, j = np.argmin(rows), np.argmax(rows)
            cell_size = (ys[j] - ys[i]) / (rows[j] - rows[i])
        else:
            raise DatasetError("cannot infer the cell size from a single column and row; pass it explicitly", layer="field")
        cell_size = sig9(cell_size)
    origin_x = round((xs[0] - (cols[0] + 0.5) * cell_size) / cell_size) * cell_size
    origin_y = round((ys[0] - (rows[0] + 0.5) * cell_size) / cell_size) * cell_size
    return GridSpec(
        origin_x=origin_x,
        origin_y=origin_y,
        cell_size=cell_size,
        n_cols=int(cols.max()) + 1,
        n_rows=int(rows.max()) + 1,
    )


def read_field(path: PathLike, cell_size: Optional[float] = None, tag: Optional[str] = None) -> AccessField:
    """
    Reload a field CSV written by write_field_csv.

    The grid extent is rebuilt from the cells present (rows and columns up to
    the largest index), which is the same for two files covering the same cells.

    Raises:
        DatasetError: If the file is missing or lacks the field columns
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"file not found: {path}", layer="field")
    frame = pd.read_csv(path, dtype={"cell_id": str})
    missing = [c for c in FIELD_COLUMNS if c not in frame.columns]
    if missing:
        raise DatasetError(f"missing columns: {', '.join(missing)}", layer="field")
    if frame.empty:
        raise DatasetError("field file has no cells", layer="field")

    spec = _infer_spec(frame, cell_size)
    cells = cells_from_ids(spec, zip(frame["row"].astype(int), frame["col"].astype(int)))
    values = {
        kind: frame[column].to_numpy(dtype=float)
        for kind, column in KIND_COLUMNS.items()
        if not frame[column].isna().all()
    }
    population = None
    if not frame["pop_total"].isna().all():
        population = PopulationField(
            spec=spec,
            cells=cells,
            total=frame["pop_total"].fillna(0.0).to_numpy(dtype=float),
            female=frame["pop_female"].fillna(0.0).to_numpy(dtype=float),
            male=frame["pop_male"].fillna(0.0).to_numpy(dtype=float),
        )
    return AccessField(
        spec=spec,
        cells=cells,
        values=values,
        stream=GenderStream.TOTAL,
        tag=tag or path.stem,
        population=population,
    )


def write_grid_csv(cells: Sequence[GridCell], path: PathLike) -> Path:
    """Cell ids and centroids of the grid stage."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        {
            "cell_id": [c.cell_id for c in cells],
            "row": [c.row for c in cells],
            "col": [c.col for c in cells],
            "x": [c.centroid.x for c in cells],
            "y": [c.centroid.y for c in cells],
        }
    ).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_population_csv(population: PopulationField, path: PathLike) -> Path:
    """Per-cell population streams of the allocation stage."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        {
            "cell_id": [c.cell_id for c in population.cells],
            "row": [c.row for c in population.cells],
            "col": [c.col for c in population.cells],
            "pop_total": population.total,
            "pop_female": population.female,
            "pop_male": population.male,
        }
    ).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def file_tag(tag: str) -> str:
    """Tag usable in a file name; characters outside [A-Za-z0-9._-] become "_"."""
    return "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in tag)


def write_blocks_csv(summaries: Sequence[BlockSummary], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [s.model_dump() for s in summaries], columns=["block_id", "n_cells", "mean", "delta"]
    )
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_table_csv(rows: List[Dict[str, Any]], columns: List[str], path: PathLike) -> Path:
    """Generic small table (summaries, scatter data) at the shared float precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=columns).to_csv(
        path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return path


def write_json(document: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True, ensure_ascii=False, default=str)
        f.write("\n")
    return path


__all__ = [
    "FIELD_COLUMNS",
    "FLOAT_FORMAT",
    "sig9",
    "field_frame",
    "write_field_csv",
    "write_field_geojson",
    "read_field",
    "write_grid_csv",
    "write_population_csv",
    "file_tag",
    "write_blocks_csv",
    "write_table_csv",
    "write_json",
]
