"""
Mask and bounding-box files.

Masks are 8-bit single-channel PNG or PGM; any nonzero value is the
shelter class. Written masks use 0 and 255.
"""

from pathlib import Path
from typing import Iterable, Tuple, Union

import numpy as np
import pandas as pd
from PIL import Image

from core.errors import MaskShapeError
from core.logger import get_logger
from maskops.components import BBox
from maskops.mask import BinaryMask

logger = get_logger(__name__)

BBOX_COLUMNS = ["mask_id", "min_col", "min_row", "max_col", "max_row"]

PathLike = Union[str, Path]


def read_mask(path: PathLike) -> BinaryMask:
    """
    Load a mask image.

    Raises:
        FileNotFoundError: If the file does not exist
        MaskShapeError: If the image is not single-channel
    """
    with Image.open(path) as image:
        if image.mode not in ("1", "L", "I", "I;16", "P"):
            raise MaskShapeError(f"{path}: expected a single-channel mask, got mode {image.mode}")
        bits = np.asarray(image.convert("L")) != 0 if image.mode == "P" else np.asarray(image) != 0
    return BinaryMask(bits)


def write_mask(mask: BinaryMask, path: PathLike) -> Path:
    """Save as PNG or PGM, chosen by the file extension."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(mask.bits.astype(np.uint8) * 255).save(path)
    return path


def write_bboxes(rows: Iterable[Tuple[str, BBox]], path: PathLike) -> Path:
    """CSV with one row per (mask_id, box)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [{"mask_id": mask_id, **box.as_row()} for mask_id, box in rows], columns=BBOX_COLUMNS
    )
    frame.to_csv(path, index=False)
    logger.info(f"Wrote {len(frame)} bounding boxes to {path}")
    return path


def read_bboxes(path: PathLike) -> list[Tuple[str, BBox]]:
    frame = pd.read_csv(path, dtype={"mask_id": str})
    return [
        (
            row.mask_id,
            BBox(min_row=row.min_row, min_col=row.min_col, max_row=row.max_row, max_col=row.max_col),
        )
        for row in frame.itertuples(index=False)
    ]


__all__ = ["BBOX_COLUMNS", "read_mask", "write_mask", "write_bboxes", "read_bboxes"]
