"""
Block-level summaries of accessibility fields.

A cell belongs to a block when its centroid lies inside or on the block
polygon; a centroid on a shared boundary goes to the first block listed.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from accessibility.field import AccessField, _check_same_grid, cells_in
from core.logger import DIAGNOSTIC, get_logger
from core.schema import FacilityKind
from geo.primitives import Areal, validate_polygon

logger = get_logger(__name__)


@dataclass(frozen=True)
class Block:
    """An administrative block polygon."""

    block_id: str
    boundary: Areal = field(compare=False)

    def __post_init__(self):
        validate_polygon(self.boundary, f"block {self.block_id}")


class BlockSummary(BaseModel):
    """
    Mean accessibility over a block's member cells.

    `mean` and `delta` are None for blocks without member cells.
    """

    block_id: str
    n_cells: int
    mean: Optional[float] = None
    delta: Optional[float] = None

    @property
    def empty(self) -> bool:
        return self.n_cells == 0


def block_members(field_: AccessField, blocks: Sequence[Block]) -> List[np.ndarray]:
    """Member cell indices per block, each cell assigned at most once."""
    taken = np.zeros(len(field_.cells), dtype=bool)
    members: List[np.ndarray] = []
    for block in blocks:
        inside = cells_in(block.boundary, field_.cells)
        inside = inside[~taken[inside]]
        taken[inside] = True
        members.append(inside)
    return members


def aggregate_blocks(
    field_: AccessField,
    blocks: Sequence[Block],
    column: Union[str, FacilityKind] = "A_mean",
) -> List[BlockSummary]:
    """
    Mean of one field column per block.

    Empty blocks are reported with n_cells = 0 and no value.

    Example:
        >>> [s.mean for s in aggregate_blocks(field_, [block])]
        [0.03]
    """
    values = field_.column(column)
    summaries: List[BlockSummary] = []
    for block, members in zip(blocks, block_members(field_, blocks)):
        if len(members) == 0:
            logger.log(DIAGNOSTIC, f"Block {block.block_id} contains no grid cell centroids")
            summaries.append(BlockSummary(block_id=block.block_id, n_cells=0))
            continue
        summaries.append(
            BlockSummary(
                block_id=block.block_id,
                n_cells=len(members),
                mean=float(values[members].mean()),
            )
        )
    return summaries


def compare_blocks(
    epoch_a: AccessField,
    epoch_b: AccessField,
    blocks: Sequence[Block],
    column: Union[str, FacilityKind] = "A_mean",
) -> List[BlockSummary]:
    """Block means of epoch b together with their change from epoch a."""
    _check_same_grid(epoch_a, epoch_b)
    before = aggregate_blocks(epoch_a, blocks, column)
    after = aggregate_blocks(epoch_b, blocks, column)
    return [
        b.model_copy(update={"delta": None if b.mean is None else b.mean - a.mean})
        for a, b in zip(before, after)
    ]


def empty_blocks(summaries: Sequence[BlockSummary]) -> List[str]:
    return [s.block_id for s in summaries if s.empty]


__all__ = [
    "Block",
    "BlockSummary",
    "block_members",
    "aggregate_blocks",
    "compare_blocks",
    "empty_blocks",
]
