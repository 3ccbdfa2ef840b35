"""
Bounding boxes of connected shelter components, used as spatial prompts.
"""

from dataclasses import dataclass
from typing import List

from scipy import ndimage

from maskops.mask import BinaryMask

STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True, order=True)
class BBox:
    """Inclusive pixel bounds of one component; ordering is (min_row, min_col, ...)."""

    min_row: int
    min_col: int
    max_row: int
    max_col: int

    def __post_init__(self):
        if self.min_row > self.max_row or self.min_col > self.max_col:
            raise ValueError(f"Inverted bounding box: {self}")

    @property
    def width(self) -> int:
        return self.max_col - self.min_col + 1

    @property
    def height(self) -> int:
        return self.max_row - self.min_row + 1

    def as_row(self) -> dict:
        return {
            "min_col": self.min_col,
            "min_row": self.min_row,
            "max_col": self.max_col,
            "max_row": self.max_row,
        }


def extract_bboxes(mask: BinaryMask, connectivity: int = 8) -> List[BBox]:
    """
    One box per connected component, sorted by (min_row, min_col).

    Example:
        >>> m = BinaryMask.from_array([[1, 1, 1], [1, 1, 1]])
        >>> extract_bboxes(m)
        [BBox(min_row=0, min_col=0, max_row=1, max_col=2)]
    """
    if connectivity not in STRUCTURES:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, n = ndimage.label(mask.bits, structure=STRUCTURES[connectivity])
    if n == 0:
        return []
    boxes = [
        BBox(
            min_row=int(rows.start),
            min_col=int(cols.start),
            max_row=int(rows.stop) - 1,
            max_col=int(cols.stop) - 1,
        )
        for rows, cols in ndimage.find_objects(labels)
    ]
    return sorted(boxes)


def component_count(mask: BinaryMask, connectivity: int = 8) -> int:
    return int(ndimage.label(mask.bits, structure=STRUCTURES[connectivity])[1])


__all__ = ["BBox", "extract_bboxes", "component_count"]
