"""
Demand-supply catchment pairs for the 2SFCA engine.

Only pairs within the catchment are materialized. They are kept as
(row, col, distance) triples rather than a sparse matrix of distances,
because a co-located pair has distance 0 and would vanish as an implicit
zero. Kernel weights, which are strictly positive inside the catchment,
are what goes into scipy sparse matrices.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from accessibility.kernel import decay_weights
from core.base import BaseDistanceModel
from core.logger import get_logger
from core.schema import DecayKernel
from geo.primitives import euclidean_many
from network.distance import pair_distances
from network.graph import PedestrianNetwork
from network.paths import anchor_graph, iter_tree_blocks
from network.snapping import offsets_of, snap_many

logger = get_logger(__name__)


@dataclass
class CatchmentPairs:
    """
    Demand-supply pairs with their travel distance, sorted by (row, col).

    Attributes:
        rows: Demand indices
        cols: Supply indices
        distances: Travel distance of each pair, meters, finite and >= 0
        shape: (n_demand, n_supply)
    """

    rows: np.ndarray
    cols: np.ndarray
    distances: np.ndarray
    shape: Tuple[int, int]

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.int64)
        self.cols = np.asarray(self.cols, dtype=np.int64)
        self.distances = np.asarray(self.distances, dtype=float)
        if not (len(self.rows) == len(self.cols) == len(self.distances)):
            raise ValueError("rows, cols and distances must have equal length")
        if np.any(self.distances < 0) or not np.all(np.isfinite(self.distances)):
            raise ValueError("catchment distances must be finite and >= 0")
        order = np.lexsort((self.cols, self.rows))
        self.rows, self.cols, self.distances = (
            self.rows[order],
            self.cols[order],
            self.distances[order],
        )

    @classmethod
    def empty(cls, n_demand: int, n_supply: int) -> "CatchmentPairs":
        return cls(np.zeros(0), np.zeros(0), np.zeros(0), (n_demand, n_supply))

    @classmethod
    def from_dense(cls, distances: np.ndarray, cutoff: float = np.inf) -> "CatchmentPairs":
        """Pairs from a full (n, m) distance matrix; inf marks unreachable."""
        distances = np.asarray(distances, dtype=float)
        rows, cols = np.nonzero(np.isfinite(distances) & (distances <= cutoff))
        return cls(rows, cols, distances[rows, cols], distances.shape)

    def __len__(self) -> int:
        return len(self.rows)

    def select_supply(self, supply_idx: np.ndarray) -> "CatchmentPairs":
        """Pairs restricted to a subset of supply points, renumbered in subset order."""
        supply_idx = np.asarray(supply_idx, dtype=np.int64)
        remap = np.full(self.shape[1], -1, dtype=np.int64)
        remap[supply_idx] = np.arange(len(supply_idx))
        keep = remap[self.cols] >= 0
        return CatchmentPairs(
            self.rows[keep],
            remap[self.cols[keep]],
            self.distances[keep],
            (self.shape[0], len(supply_idx)),
        )

    def kernel_matrix(self, kernel: DecayKernel) -> sparse.csr_matrix:
        """K as an (n, m) CSR matrix; pairs beyond kernel.d0 are left out."""
        keep = self.distances <= kernel.d0
        weights = decay_weights(self.distances[keep], kernel)
        matrix = sparse.csr_matrix(
            (weights, (self.rows[keep], self.cols[keep])), shape=self.shape
        )
        # Weights can underflow to 0 for a tiny sigma
        matrix.eliminate_zeros()
        return matrix

    def to_dense(self) -> np.ndarray:
        dense = np.full(self.shape, np.inf)
        dense[self.rows, self.cols] = self.distances
        return dense


def _xy(points: np.ndarray) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, 2)


def _ball_pairs(
    a_xy: np.ndarray, b_xy: np.ndarray, radius: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j) with |a_i - b_j| <= radius, possibly with a few extras."""
    if len(a_xy) == 0 or len(b_xy) == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    hits = cKDTree(b_xy).query_ball_point(a_xy, r=radius * (1 + 1e-9) + 1e-9)
    counts = np.fromiter((len(h) for h in hits), dtype=np.int64, count=len(hits))
    rows = np.repeat(np.arange(len(a_xy), dtype=np.int64), counts)
    cols = (
        np.concatenate([np.asarray(h, dtype=np.int64) for h in hits])
        if counts.sum()
        else np.zeros(0, dtype=np.int64)
    )
    return rows, cols


class EuclideanDistanceModel(BaseDistanceModel):
    """Straight-line distances between the original points."""

    def __init__(self, name: str = "euclidean"):
        super().__init__(name=name)

    def catchment_pairs(
        self, demand_xy: np.ndarray, supply_xy: np.ndarray, cutoff: float
    ) -> CatchmentPairs:
        demand_xy, supply_xy = _xy(demand_xy), _xy(supply_xy)
        rows, cols = _ball_pairs(demand_xy, supply_xy, cutoff)
        e = euclidean_many(demand_xy[rows], supply_xy[cols])
        keep = e <= cutoff
        pairs = CatchmentPairs(
            rows[keep], cols[keep], e[keep], (len(demand_xy), len(supply_xy))
        )
        logger.info(f"Euclidean catchment: {len(pairs)} pairs within {cutoff:.1f} m")
        return pairs


def _groups(inverse: np.ndarray, n_groups: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(members sorted by group, group start offsets, group sizes)."""
    order = np.argsort(inverse, kind="stable")
    counts = np.bincount(inverse, minlength=n_groups)
    starts = np.cumsum(counts) - counts
    return order, starts, counts


def _expand_vertex_pairs(a, b, g, src_groups, tgt_groups):
    """Turn (source vertex, target vertex, g) triples into point pairs sharing those anchors."""
    s_order, s_start, s_count = src_groups
    t_order, t_start, t_count = tgt_groups
    per_entry = s_count[a] * t_count[b]
    total = int(per_entry.sum())
    entry = np.repeat(np.arange(len(a)), per_entry)
    within = np.arange(total) - np.repeat(np.cumsum(per_entry) - per_entry, per_entry)
    width = t_count[b][entry]
    src_pts = s_order[s_start[a][entry] + within // width]
    tgt_pts = t_order[t_start[b][entry] + within % width]
    return src_pts, tgt_pts, g[entry]


class NetworkDistanceModel(BaseDistanceModel):
    """
    Pedestrian-network distances with snap offsets and the Euclidean fallback.

    Attributes:
        network: Footpath graph the points are snapped to
        workers: Threads for the shortest-path stage
        batch_size: Sources per Dijkstra batch
    """

    def __init__(
        self,
        network: Optional[PedestrianNetwork] = None,
        workers: int = 1,
        batch_size: int = 64,
        name: str = "network",
    ):
        super().__init__(name=name)
        if network is None:
            raise ValueError("NetworkDistanceModel needs a pedestrian network")
        if workers < 1 or batch_size < 1:
            raise ValueError("workers and batch_size must be >= 1")
        self.network = network
        self.workers = workers
        self.batch_size = batch_size

    def catchment_pairs(
        self, demand_xy: np.ndarray, supply_xy: np.ndarray, cutoff: float
    ) -> CatchmentPairs:
        """
        Every pair whose offset-adjusted network distance is within cutoff.

        Pairs are split in two disjoint sets: points closer than their two
        offsets together take the straight-line distance, all others take
        g + s_i + s_j. Trees are grown from whichever side has fewer distinct
        anchors.
        """
        demand_xy, supply_xy = _xy(demand_xy), _xy(supply_xy)
        n, m = len(demand_xy), len(supply_xy)
        if n == 0 or m == 0:
            return CatchmentPairs.empty(n, m)

        snaps_d = snap_many(demand_xy, self.network)
        snaps_s = snap_many(supply_xy, self.network)
        s_d, s_s = offsets_of(snaps_d), offsets_of(snaps_s)
        graph = anchor_graph(self.network, snaps_d + snaps_s)
        v_d, v_s = graph.anchor_vertex[:n], graph.anchor_vertex[n:]
        tree_cutoff = cutoff + float(s_d.max()) + float(s_s.max())

        d_uniq, d_inv = np.unique(v_d, return_inverse=True)
        s_uniq, s_inv = np.unique(v_s, return_inverse=True)
        from_supply = len(s_uniq) < len(d_uniq)
        if from_supply:
            src_uniq, src_inv, tgt_uniq, tgt_inv = s_uniq, s_inv, d_uniq, d_inv
        else:
            src_uniq, src_inv, tgt_uniq, tgt_inv = d_uniq, d_inv, s_uniq, s_inv
        src_groups = _groups(src_inv.ravel(), len(src_uniq))
        tgt_groups = _groups(tgt_inv.ravel(), len(tgt_uniq))

        rows_parts, cols_parts, dist_parts = [], [], []
        row_offset = 0
        for block in iter_tree_blocks(
            graph,
            src_uniq,
            tree_cutoff,
            tgt_uniq,
            workers=self.workers,
            batch_size=self.batch_size,
        ):
            a, b = np.nonzero(np.isfinite(block.distances))
            g = block.distances[a, b]
            src_pts, tgt_pts, g = _expand_vertex_pairs(
                a + row_offset, b, g, src_groups, tgt_groups
            )
            row_offset += len(block.source_ids)
            i, j = (tgt_pts, src_pts) if from_supply else (src_pts, tgt_pts)

            e = euclidean_many(demand_xy[i], supply_xy[j])
            via_network = ~(e < s_d[i] + s_s[j])
            d = pair_distances(e, s_d[i], s_s[j], g)
            keep = via_network & (d <= cutoff)
            rows_parts.append(i[keep])
            cols_parts.append(j[keep])
            dist_parts.append(d[keep])

        # Straight-line pairs, independent of network reachability
        max_offsets = float(s_d.max() + s_s.max())
        if max_offsets > 0:
            i, j = _ball_pairs(demand_xy, supply_xy, max_offsets)
            e = euclidean_many(demand_xy[i], supply_xy[j])
            keep = (e < s_d[i] + s_s[j]) & (e <= cutoff)
            rows_parts.append(i[keep])
            cols_parts.append(j[keep])
            dist_parts.append(e[keep])

        pairs = CatchmentPairs(
            np.concatenate(rows_parts) if rows_parts else np.zeros(0),
            np.concatenate(cols_parts) if cols_parts else np.zeros(0),
            np.concatenate(dist_parts) if dist_parts else np.zeros(0),
            (n, m),
        )
        logger.info(
            f"Network catchment: {len(pairs)} pairs within {cutoff:.1f} m "
            f"({len(src_uniq)} tree sources, tree cutoff {tree_cutoff:.1f} m)"
        )
        return pairs


__all__ = ["CatchmentPairs", "EuclideanDistanceModel", "NetworkDistanceModel"]
