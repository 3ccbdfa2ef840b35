"""
Snapping of demand and supply points onto the pedestrian network.

A point is attached to the nearest point of the nearest edge, which may lie
inside the edge. The Euclidean gap between the original point and its anchor
is the offset that the pair distance rule adds back later.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import shapely

from core.errors import GeometryError
from core.logger import get_logger
from network.graph import PedestrianNetwork

logger = get_logger(__name__)

# Anchors closer than this to an edge end are treated as sitting on the vertex
VERTEX_EPS = 1e-9


@dataclass(frozen=True)
class SnapResult:
    """
    Where a point joins the network.

    Attributes:
        edge_id: Edge carrying the anchor
        position: Distance along the edge from its first vertex, in meters
        offset: Euclidean distance from the original point to the anchor (s_i)
        x, y: Original point
        anchor_x, anchor_y: Anchor coordinates
        vertex: Network vertex id when the anchor sits on an edge end, else None
    """

    edge_id: int
    position: float
    offset: float
    x: float
    y: float
    anchor_x: float
    anchor_y: float
    vertex: Optional[int] = None

    @property
    def on_vertex(self) -> bool:
        return self.vertex is not None


def _pick_lowest_edge(query_idx: np.ndarray, edge_idx: np.ndarray, n_points: int) -> np.ndarray:
    """For each query point, the lowest edge id among its equidistant nearest edges."""
    best = np.full(n_points, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(best, query_idx, edge_idx)
    return best


def snap_many(points: np.ndarray, net: PedestrianNetwork) -> List[SnapResult]:
    """
    Snap an (n, 2) array of points; ties between equidistant edges go to the lowest edge id.

    Raises:
        GeometryError: If the network has no edges or a coordinate is not finite
    """
    if net.n_edges == 0:
        raise GeometryError("Cannot snap onto an empty network")
    xy = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(xy) == 0:
        return []
    if not np.all(np.isfinite(xy)):
        raise GeometryError("Snapped points must have finite coordinates")

    geoms = shapely.points(xy)
    (query_idx, edge_idx), dist = net.tree.query_nearest(
        geoms, all_matches=True, return_distance=True
    )
    edge_of = _pick_lowest_edge(query_idx, edge_idx, len(xy))

    offset = np.full(len(xy), np.inf)
    chosen = edge_idx == edge_of[query_idx]
    offset[query_idx[chosen]] = dist[chosen]

    lines = net.lines[edge_of]
    position = shapely.line_locate_point(lines, geoms)
    lengths = net.lengths[edge_of]
    position = np.clip(position, 0.0, lengths)

    at_start = position <= VERTEX_EPS
    at_end = position >= lengths - VERTEX_EPS
    position = np.where(at_start, 0.0, np.where(at_end, lengths, position))

    anchors = shapely.get_coordinates(shapely.line_interpolate_point(lines, position))
    u = net.edges[edge_of, 0]
    v = net.edges[edge_of, 1]
    anchors[at_start] = net.vertices[u[at_start]]
    anchors[at_end & ~at_start] = net.vertices[v[at_end & ~at_start]]

    results: List[SnapResult] = []
    for k in range(len(xy)):
        vertex = int(u[k]) if at_start[k] else int(v[k]) if at_end[k] else None
        results.append(
            SnapResult(
                edge_id=int(edge_of[k]),
                position=float(position[k]),
                offset=float(offset[k]),
                x=float(xy[k, 0]),
                y=float(xy[k, 1]),
                anchor_x=float(anchors[k, 0]),
                anchor_y=float(anchors[k, 1]),
                vertex=vertex,
            )
        )
    return results


def snap(x: float, y: float, net: PedestrianNetwork) -> SnapResult:
    """
    Snap one point to the nearest point on any edge.

    Example:
        >>> net = build_network([[(0, 0), (2, 0)]])
        >>> r = snap(0.0, 1.0, net)
        >>> (r.offset, r.position)
        (1.0, 0.0)
    """
    return snap_many(np.array([[x, y]], dtype=float), net)[0]


def offsets_of(snaps: Sequence[SnapResult]) -> np.ndarray:
    return np.array([s.offset for s in snaps], dtype=float)


__all__ = ["SnapResult", "snap", "snap_many", "offsets_of", "VERTEX_EPS"]
