"""
Pedestrian network built from footpath polylines.

Polyline vertices closer than `snap_tolerance` are merged into one network
vertex; consecutive vertices of a polyline become undirected edges weighted
by their planar length. Vertex ids follow first appearance in the input, and
edge ids follow input order, so rebuilding from the same file gives the same
graph.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import shapely
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from shapely import STRtree
from shapely.geometry import LineString

from core.errors import GeometryError
from core.logger import DIAGNOSTIC, get_logger

logger = get_logger(__name__)

Polyline = Union[LineString, Sequence[Tuple[float, float]]]


@dataclass
class PedestrianNetwork:
    """
    Undirected weighted graph of footpaths.

    Attributes:
        vertices: (n, 2) vertex coordinates in meters
        edges: (m, 2) vertex ids, one row per edge, in input order
        lengths: (m,) edge lengths in meters, all > 0
        dropped_segments: Segments removed because they collapsed after merging
    """

    vertices: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray
    dropped_segments: int = 0
    _lines: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _tree: Optional[STRtree] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        self.lengths = np.asarray(self.lengths, dtype=float)
        if not np.all(np.isfinite(self.vertices)):
            raise GeometryError("Network vertex coordinates must be finite")
        if len(self.lengths) != len(self.edges):
            raise GeometryError("Every edge needs exactly one length")
        if np.any(self.lengths <= 0):
            raise GeometryError("Edge lengths must be > 0")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def lines(self) -> np.ndarray:
        """Edge geometries, each directed from its first to its second vertex."""
        if self._lines is None:
            coords = np.stack([self.vertices[self.edges[:, 0]], self.vertices[self.edges[:, 1]]], 1)
            self._lines = shapely.linestrings(coords)
        return self._lines

    @property
    def tree(self) -> STRtree:
        """Spatial index over edges; tree indices equal edge ids."""
        if self._tree is None:
            self._tree = STRtree(self.lines)
        return self._tree

    def to_csr(self) -> sparse.csr_matrix:
        """Symmetric adjacency matrix; parallel edges keep their shortest length."""
        return edge_list_to_csr(self.edges[:, 0], self.edges[:, 1], self.lengths, self.n_vertices)

    def add_edge(self, u: int, v: int, length: Optional[float] = None) -> "PedestrianNetwork":
        """A copy of the network with one more edge (planar length by default)."""
        if length is None:
            length = float(np.hypot(*(self.vertices[u] - self.vertices[v])))
        return PedestrianNetwork(
            vertices=self.vertices.copy(),
            edges=np.vstack([self.edges, [[u, v]]]),
            lengths=np.append(self.lengths, length),
            dropped_segments=self.dropped_segments,
        )


def edge_list_to_csr(
    u: np.ndarray, v: np.ndarray, w: np.ndarray, n_vertices: int
) -> sparse.csr_matrix:
    """
    Build a symmetric CSR adjacency from an undirected edge list.

    scipy sums duplicate entries, so parallel edges are reduced to their
    minimum length first.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    w = np.asarray(w, dtype=float)
    keep = u != v
    lo = np.minimum(u, v)[keep]
    hi = np.maximum(u, v)[keep]
    w = w[keep]

    key = lo * np.int64(n_vertices) + hi
    order = np.lexsort((w, key))
    key, lo, hi, w = key[order], lo[order], hi[order], w[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    lo, hi, w = lo[first], hi[first], w[first]

    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    data = np.concatenate([w, w])
    return sparse.csr_matrix((data, (rows, cols)), shape=(n_vertices, n_vertices))


def _as_coords(polyline: Polyline) -> np.ndarray:
    if isinstance(polyline, LineString):
        return np.asarray(polyline.coords, dtype=float)[:, :2]
    return np.asarray(polyline, dtype=float).reshape(-1, 2)


def _merge_vertices(points: np.ndarray, tolerance: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cluster points closer than `tolerance` (transitively).

    Returns:
        (labels, representatives): labels[i] is the merged vertex id of point i,
        ids numbered by first appearance; each representative is the first
        point of its cluster.
    """
    n = len(points)
    pairs = cKDTree(points).query_pairs(r=tolerance, output_type="ndarray") if n else None
    if pairs is None or len(pairs) == 0:
        graph = sparse.identity(n, format="csr")
    else:
        graph = sparse.csr_matrix(
            (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)
        )
    _, raw = connected_components(graph, directed=False)

    # Renumber clusters by the first point that belongs to them
    first_seen = np.full(raw.max() + 1 if n else 0, n, dtype=np.int64)
    np.minimum.at(first_seen, raw, np.arange(n))
    order = np.argsort(first_seen, kind="stable")
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    labels = relabel[raw]
    representatives = points[np.sort(first_seen)]
    return labels, representatives


def build_network(
    segments: Iterable[Polyline], snap_tolerance: float = 0.5
) -> PedestrianNetwork:
    """
    Build the pedestrian graph from footpath polylines.

    Args:
        segments: LineStrings or coordinate sequences, in meters
        snap_tolerance: Vertices within this distance are merged (>= 0)

    Returns:
        PedestrianNetwork with chained edges per polyline

    Raises:
        GeometryError: If no segments are given or the tolerance is negative

    Example:
        >>> net = build_network([[(0, 0), (3, 0), (3, 4)]])
        >>> net.lengths.tolist()
        [3.0, 4.0]
    """
    if snap_tolerance < 0:
        raise GeometryError(f"snap_tolerance must be >= 0, got {snap_tolerance}")

    polylines: List[np.ndarray] = [_as_coords(s) for s in segments]
    polylines = [p for p in polylines if len(p) >= 2]
    if not polylines:
        raise GeometryError("Cannot build a network from zero footpath segments")

    points = np.concatenate(polylines)
    if not np.all(np.isfinite(points)):
        raise GeometryError("Footpath coordinates must be finite")

    labels, vertices = _merge_vertices(points, snap_tolerance)

    starts = np.cumsum([0] + [len(p) for p in polylines[:-1]])
    a_idx = np.concatenate([s + np.arange(len(p) - 1) for s, p in zip(starts, polylines)])
    u = labels[a_idx]
    v = labels[a_idx + 1]

    collapsed = u == v
    dropped = int(collapsed.sum())
    u, v = u[~collapsed], v[~collapsed]
    lengths = np.hypot(*(vertices[u] - vertices[v]).T)
    if dropped:
        logger.log(DIAGNOSTIC, f"Dropped {dropped} zero-length footpath segments after merging")

    net = PedestrianNetwork(
        vertices=vertices, edges=np.stack([u, v], axis=1), lengths=lengths, dropped_segments=dropped
    )
    logger.info(
        f"Built pedestrian network: {net.n_vertices} vertices, {net.n_edges} edges "
        f"(tolerance {snap_tolerance:g} m)"
    )
    return net


__all__ = ["PedestrianNetwork", "build_network", "edge_list_to_csr"]
