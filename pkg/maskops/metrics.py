"""
Segmentation scores for binary masks.

Ratios with a zero denominator are undefined and reported as None rather
than imputed.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.logger import DIAGNOSTIC, get_logger
from maskops.mask import BinaryMask, check_same_shape

logger = get_logger(__name__)

METRICS = ("iou", "precision", "recall", "f1")


def _ratio(num: int, den: int) -> Optional[float]:
    return None if den == 0 else num / den


class ConfusionCounts(BaseModel):
    """Pixel confusion counts of a prediction against ground truth."""

    model_config = ConfigDict(frozen=True)

    tp: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)

    @classmethod
    def of(cls, pred: BinaryMask, gt: BinaryMask) -> "ConfusionCounts":
        check_same_shape(pred, gt)
        p, g = pred.bits, gt.bits
        tp = int(np.count_nonzero(p & g))
        fp = int(np.count_nonzero(p & ~g))
        fn = int(np.count_nonzero(~p & g))
        return cls(tp=tp, fp=fp, fn=fn, tn=p.size - tp - fp - fn)

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
            tn=self.tn + other.tn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def iou(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fp + self.fn)

    @property
    def precision(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fp)

    @property
    def recall(self) -> Optional[float]:
        return _ratio(self.tp, self.tp + self.fn)

    @property
    def f1(self) -> Optional[float]:
        # Harmonic mean of precision and recall, in count form
        return _ratio(2 * self.tp, 2 * self.tp + self.fp + self.fn)


def f1_from(precision: float, recall: float) -> float:
    """
    Harmonic mean of precision and recall.

    Example:
        >>> round(f1_from(75.8, 77.0), 1)
        76.4
    """
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def mask_f1(a: BinaryMask, b: BinaryMask) -> float:
    """
    Dice overlap 2|a∩b| / (|a| + |b|); two empty masks score 1.

    Raises:
        MaskShapeError: If the dimensions differ
    """
    check_same_shape(a, b)
    overlap = int(np.count_nonzero(a.bits & b.bits))
    denominator = a.count + b.count
    if denominator == 0:
        return 1.0
    return (2 * overlap) / denominator


class MaskScore(BaseModel):
    """Counts plus derived metrics; `both_empty` marks a prediction and truth with no shelter."""

    counts: ConfusionCounts
    iou: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    both_empty: bool = False

    @classmethod
    def from_counts(cls, counts: ConfusionCounts) -> "MaskScore":
        return cls(
            counts=counts,
            iou=counts.iou,
            precision=counts.precision,
            recall=counts.recall,
            f1=counts.f1,
            both_empty=counts.tp + counts.fp + counts.fn == 0,
        )

    def metric(self, name: str) -> Optional[float]:
        return getattr(self, name)


def score(pred: BinaryMask, gt: BinaryMask) -> MaskScore:
    """IoU, precision, recall and F1 of one prediction."""
    return MaskScore.from_counts(ConfusionCounts.of(pred, gt))


class CorpusScore(BaseModel):
    """
    Aggregate metrics over a corpus of (prediction, truth) pairs.

    Attributes:
        mode: "micro" pools counts before computing ratios, "macro" averages per-pair ratios
        skipped: Pairs left out of each macro average because the metric was undefined
    """

    mode: Literal["micro", "macro"]
    n_pairs: int
    counts: ConfusionCounts
    iou: Optional[float]
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    skipped: Dict[str, int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _pairs(self) -> "CorpusScore":
        if self.n_pairs < 1:
            raise ValueError("a corpus score needs at least one pair")
        return self


def score_corpus(
    pairs: Sequence[Tuple[BinaryMask, BinaryMask]],
    mode: Literal["micro", "macro"] = "micro",
    workers: int = 1,
) -> CorpusScore:
    """
    Score a corpus.

    Raises:
        ValueError: If the corpus is empty or the mode unknown
        MaskShapeError: If any pair has mismatched dimensions
    """
    if not pairs:
        raise ValueError("Cannot score an empty corpus")
    if mode not in ("micro", "macro"):
        raise ValueError(f"mode must be 'micro' or 'macro', got '{mode}'")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_pair: List[MaskScore] = list(pool.map(lambda p: score(*p), pairs))
    else:
        per_pair = [score(pred, gt) for pred, gt in pairs]

    pooled = per_pair[0].counts
    for item in per_pair[1:]:
        pooled = pooled + item.counts

    if mode == "micro":
        return CorpusScore(
            mode=mode,
            n_pairs=len(pairs),
            counts=pooled,
            iou=pooled.iou,
            precision=pooled.precision,
            recall=pooled.recall,
            f1=pooled.f1,
        )

    means: Dict[str, Optional[float]] = {}
    skipped: Dict[str, int] = {}
    for name in METRICS:
        defined = [s.metric(name) for s in per_pair if s.metric(name) is not None]
        skipped[name] = len(per_pair) - len(defined)
        means[name] = float(np.mean(defined)) if defined else None
        if skipped[name]:
            logger.log(DIAGNOSTIC, f"Macro {name}: skipped {skipped[name]} undefined pairs")
    return CorpusScore(
        mode=mode, n_pairs=len(pairs), counts=pooled, skipped=skipped, **means
    )


__all__ = [
    "ConfusionCounts",
    "MaskScore",
    "CorpusScore",
    "f1_from",
    "mask_f1",
    "score",
    "score_corpus",
]
