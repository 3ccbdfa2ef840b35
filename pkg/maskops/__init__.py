"""Binary shelter masks: alignment, prompts, refinement and scoring."""

from maskops.align import AlignResult, align, align_with, rotation_steps
from maskops.components import BBox, component_count, extract_bboxes
from maskops.io import read_bboxes, read_mask, write_bboxes, write_mask
from maskops.mask import BinaryMask, Transform, apply_transform, refine
from maskops.metrics import (
    ConfusionCounts,
    CorpusScore,
    MaskScore,
    f1_from,
    mask_f1,
    score,
    score_corpus,
)
from maskops.pseudo_label import PseudoLabel, pseudo_label

__all__ = [
    "AlignResult",
    "align",
    "align_with",
    "rotation_steps",
    "BBox",
    "component_count",
    "extract_bboxes",
    "read_bboxes",
    "read_mask",
    "write_bboxes",
    "write_mask",
    "BinaryMask",
    "Transform",
    "apply_transform",
    "refine",
    "ConfusionCounts",
    "CorpusScore",
    "MaskScore",
    "f1_from",
    "mask_f1",
    "score",
    "score_corpus",
    "PseudoLabel",
    "pseudo_label",
]
