"""
Exhaustive rigid alignment of a reference mask onto a prediction.

Every integer shift in [-R_t, R_t]² is tried for every rotation in
[-R_r, R_r] on a fixed angular step. Each rotation is computed once and
its shifts are scored from array slices, so the search costs one rotation
per angle plus one overlap count per shift.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.logger import get_logger
from core.schema import MaskSearchConfig
from maskops.mask import BinaryMask, Transform, apply_transform, check_same_shape, rotate
from maskops.metrics import mask_f1

logger = get_logger(__name__)


@dataclass(frozen=True)
class AlignResult:
    """
    Best transform of the reference and its Dice score against the prediction.

    `both_empty` is set when neither mask has any shelter pixel; the result is
    then the identity with score 1.
    """

    transform: Transform
    score: float
    both_empty: bool = False


def rotation_steps(rotation_range: float, step: float) -> List[float]:
    """Angles -R_r..R_r on multiples of `step`, always including 0."""
    if rotation_range < 0 or step <= 0:
        raise ValueError("rotation_range must be >= 0 and step > 0")
    n = int(np.floor(rotation_range / step + 1e-9))
    return [round(k * step, 10) for k in range(-n, n + 1)]


def _score_shifts(
    rotated: np.ndarray, target: np.ndarray, target_count: int, r_t: int, theta: float
) -> Tuple[Tuple[int, int, int], Transform]:
    """Best (numerator, denominator) over all shifts of one rotated mask."""
    h, w = rotated.shape
    # Summed-area table gives |T(y)| for any clipped window in O(1)
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    sat[1:, 1:] = np.cumsum(np.cumsum(rotated, axis=0, dtype=np.int64), axis=1)

    best: Optional[Tuple[Tuple[int, int], Transform]] = None
    for dv in range(-r_t, r_t + 1):
        for du in range(-r_t, r_t + 1):
            if abs(du) >= w or abs(dv) >= h:
                moved_count, overlap = 0, 0
            else:
                r0, r1 = max(-dv, 0), h + min(-dv, 0)
                c0, c1 = max(-du, 0), w + min(-du, 0)
                moved_count = int(sat[r1, c1] - sat[r0, c1] - sat[r1, c0] + sat[r0, c0])
                overlap = int(
                    np.count_nonzero(
                        rotated[r0:r1, c0:c1]
                        & target[max(dv, 0) : h + min(dv, 0), max(du, 0) : w + min(du, 0)]
                    )
                )
            candidate = ((2 * overlap, moved_count + target_count), Transform(du, dv, theta))
            if best is None or _better(candidate, best):
                best = candidate
    return best


def _value(fraction: Tuple[int, int]) -> float:
    num, den = fraction
    return 1.0 if den == 0 else num / den


def _better(a, b) -> bool:
    """Higher Dice wins; equal scores fall back to the smaller tie key."""
    (na, da), ta = a
    (nb, db), tb = b
    if da == 0 or db == 0:
        va, vb = _value((na, da)), _value((nb, db))
        if va != vb:
            return va > vb
    else:
        # Exact comparison of na/da and nb/db
        lhs, rhs = na * db, nb * da
        if lhs != rhs:
            return lhs > rhs
    return ta.tie_key() < tb.tie_key()


def align(
    y: BinaryMask,
    ref: BinaryMask,
    translation_range: int = 8,
    rotation_range: float = 5.0,
    rotation_step: float = 1.0,
    workers: int = 1,
) -> AlignResult:
    """
    Find the transform T maximizing mask_f1(T(y), ref).

    Ties go to the smallest |du| + |dv|, then the smallest |theta|, then the
    lexicographically smallest (du, dv, theta).

    Raises:
        MaskShapeError: If the dimensions differ
        ValueError: If a search range is negative
    """
    check_same_shape(y, ref)
    if translation_range < 0:
        raise ValueError(f"translation_range must be >= 0, got {translation_range}")
    if y.empty and ref.empty:
        logger.warning("Both masks are empty; alignment returns the identity")
        return AlignResult(transform=Transform(), score=1.0, both_empty=True)

    thetas = rotation_steps(rotation_range, rotation_step)
    target = ref.bits
    target_count = ref.count

    def search(theta: float):
        return _score_shifts(rotate(y.bits, theta), target, target_count, translation_range, theta)

    if workers > 1 and len(thetas) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            candidates = list(pool.map(search, thetas))
    else:
        candidates = [search(theta) for theta in thetas]

    best = candidates[0]
    for candidate in candidates[1:]:
        if _better(candidate, best):
            best = candidate
    transform = best[1]
    return AlignResult(transform=transform, score=_value(best[0]))


def align_with(y: BinaryMask, ref: BinaryMask, search: MaskSearchConfig, workers: int = 1) -> AlignResult:
    return align(
        y,
        ref,
        translation_range=search.translation_range,
        rotation_range=search.rotation_range,
        rotation_step=search.rotation_step,
        workers=workers,
    )


def aligned_score(y: BinaryMask, ref: BinaryMask, t: Transform) -> float:
    """Dice of T(y) against ref, recomputed from the transformed mask."""
    return mask_f1(apply_transform(y, t), ref)


__all__ = ["AlignResult", "rotation_steps", "align", "align_with", "aligned_score"]
