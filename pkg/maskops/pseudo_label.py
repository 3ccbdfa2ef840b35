"""
Pseudo-label refinement: optionally align a reference mask to a coarse
prediction, then keep only the pixels both agree on.
"""

from dataclasses import dataclass
from typing import Optional

from core.schema import MaskSearchConfig
from maskops.align import AlignResult, align_with
from maskops.mask import BinaryMask, Transform, apply_transform, refine


@dataclass(frozen=True)
class PseudoLabel:
    mask: BinaryMask
    transform: Transform
    alignment: Optional[AlignResult] = None


def pseudo_label(
    prediction: BinaryMask,
    reference: BinaryMask,
    search: Optional[MaskSearchConfig] = None,
    workers: int = 1,
) -> PseudoLabel:
    """
    Refined label for one tile.

    Without `search` the reference is used as is; with it, the reference is
    first moved by the transform that best matches the prediction.
    """
    if search is None:
        return PseudoLabel(mask=refine(prediction, reference), transform=Transform())
    result = align_with(reference, prediction, search, workers=workers)
    moved = apply_transform(reference, result.transform)
    return PseudoLabel(mask=refine(prediction, moved), transform=result.transform, alignment=result)


__all__ = ["PseudoLabel", "pseudo_label"]
