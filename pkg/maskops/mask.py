"""
Binary shelter masks and the rigid transforms applied to them.

Pixel (row, col) = (0, 0) is the top-left corner. A transform first rotates
the mask about its center by `theta` degrees (counter-clockwise as displayed,
nearest-neighbour sampling) and then shifts it by `du` columns and `dv`
rows. Pixels arriving from outside the frame are 0.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.errors import MaskShapeError


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """
    Read-only (height, width) boolean raster; True is the shelter class.

    Example:
        >>> m = BinaryMask.from_array([[0, 1], [1, 1]])
        >>> (m.width, m.height, m.count)
        (2, 2, 3)
    """

    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 2 or bits.shape[0] == 0 or bits.shape[1] == 0:
            raise MaskShapeError(f"A mask needs two positive dimensions, got shape {bits.shape}")
        bits = bits.astype(bool, copy=True)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_array(cls, array) -> "BinaryMask":
        """Nonzero values become 1."""
        return cls(np.asarray(array) != 0)

    @classmethod
    def zeros(cls, height: int, width: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.bits.shape

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    @property
    def empty(self) -> bool:
        return self.count == 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.shape, self.bits.tobytes()))

    def __and__(self, other: "BinaryMask") -> "BinaryMask":
        return refine(self, other)


@dataclass(frozen=True)
class Transform:
    """Integer shift (du columns, dv rows) after a rotation of theta degrees."""

    du: int = 0
    dv: int = 0
    theta: float = 0.0

    @property
    def is_identity(self) -> bool:
        return self.du == 0 and self.dv == 0 and self.theta == 0

    def tie_key(self) -> Tuple[int, float, Tuple[int, int, float]]:
        """Smaller is preferred among equally scored transforms."""
        return abs(self.du) + abs(self.dv), abs(self.theta), (self.du, self.dv, self.theta)


def check_same_shape(a: BinaryMask, b: BinaryMask) -> None:
    if a.shape != b.shape:
        raise MaskShapeError(f"Mask dimensions differ: {a.shape} vs {b.shape}")


def _snap_unit(value: float) -> float:
    nearest = round(value)
    return float(nearest) if abs(value - nearest) < 1e-12 else value


def shift(bits: np.ndarray, du: int, dv: int) -> np.ndarray:
    """Shift a boolean array by du columns and dv rows, zero-padding."""
    h, w = bits.shape
    out = np.zeros_like(bits)
    if abs(du) >= w or abs(dv) >= h:
        return out
    out[max(dv, 0) : h + min(dv, 0), max(du, 0) : w + min(du, 0)] = bits[
        max(-dv, 0) : h + min(-dv, 0), max(-du, 0) : w + min(-du, 0)
    ]
    return out


def rotate(bits: np.ndarray, theta: float) -> np.ndarray:
    """
    Rotate about the array center by theta degrees, counter-clockwise as displayed.

    Each output pixel takes the nearest source pixel under the inverse
    rotation, so no new values appear.
    """
    if theta == 0:
        return bits.copy()
    h, w = bits.shape
    rad = math.radians(theta)
    cos_t, sin_t = _snap_unit(math.cos(rad)), _snap_unit(math.sin(rad))
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0

    rows, cols = np.indices((h, w), dtype=float)
    x, y = cols - cx, rows - cy
    # Rows grow downwards, which flips the sign of the visual rotation
    src_x = np.rint(x * cos_t - y * sin_t + cx).astype(np.int64)
    src_y = np.rint(x * sin_t + y * cos_t + cy).astype(np.int64)

    inside = (src_x >= 0) & (src_x < w) & (src_y >= 0) & (src_y < h)
    out = np.zeros_like(bits)
    out[inside] = bits[src_y[inside], src_x[inside]]
    return out


def apply_transform(mask: BinaryMask, t: Transform) -> BinaryMask:
    """
    Rotate then shift a mask; dimensions are unchanged.

    With Transform(du=3, dv=-2) a pixel at (row 5, col 5) moves to (row 3, col 8).
    """
    bits = rotate(mask.bits, t.theta) if t.theta else mask.bits
    return BinaryMask(shift(bits, int(t.du), int(t.dv)))


def refine(prediction: BinaryMask, reference: BinaryMask) -> BinaryMask:
    """Pixelwise AND of a coarse prediction and a reference mask."""
    check_same_shape(prediction, reference)
    return BinaryMask(prediction.bits & reference.bits)


__all__ = [
    "BinaryMask",
    "Transform",
    "check_same_shape",
    "shift",
    "rotate",
    "apply_transform",
    "refine",
]
