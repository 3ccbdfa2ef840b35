"""
Truncated one-to-all shortest paths on the pedestrian network.

Snap anchors that fall inside edges are inserted as virtual split vertices,
so every source and target is a plain vertex of an augmented graph. Trees
are grown with scipy's Dijkstra in source batches on a thread pool; each
batch writes only its own rows, and blocks come back in source order.

`naive_dijkstra` is a deliberately plain heap implementation kept as the
reference the accelerated path is checked against.
"""

import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from core.errors import GeometryError
from core.logger import STAGE, get_logger
from network.graph import PedestrianNetwork, edge_list_to_csr
from network.snapping import SnapResult

logger = get_logger(__name__)


@dataclass
class AnchorGraph:
    """
    Network augmented with split vertices for edge-interior anchors.

    Attributes:
        adjacency: Symmetric CSR adjacency over original and split vertices
        n_network_vertices: Vertices 0..n-1 are the original network vertices
        anchor_vertex: Vertex id of each anchor, in the order anchors were given
    """

    adjacency: sparse.csr_matrix
    n_network_vertices: int
    anchor_vertex: np.ndarray
    _lists: Optional[List[List[Tuple[int, float]]]] = field(default=None, init=False, repr=False)

    @property
    def n_vertices(self) -> int:
        return self.adjacency.shape[0]

    def adjacency_lists(self) -> List[List[Tuple[int, float]]]:
        """Neighbour lists (vertex, length) read from the CSR arrays."""
        if self._lists is None:
            indptr, indices, data = (
                self.adjacency.indptr,
                self.adjacency.indices,
                self.adjacency.data,
            )
            self._lists = [
                list(zip(indices[indptr[v] : indptr[v + 1]].tolist(), data[indptr[v] : indptr[v + 1]].tolist()))
                for v in range(self.n_vertices)
            ]
        return self._lists


def anchor_graph(net: PedestrianNetwork, anchors: Sequence[SnapResult]) -> AnchorGraph:
    """
    Split edges at interior anchors.

    An edge u-v of length L carrying interior anchor positions p1 < ... < pk
    becomes the chain u-a1-...-ak-v with lengths p1, p2-p1, ..., L-pk.
    Anchors sharing an edge position share a split vertex.
    """
    n = net.n_vertices
    anchor_vertex = np.empty(len(anchors), dtype=np.int64)

    interior: Dict[int, Dict[float, List[int]]] = {}
    for k, snap in enumerate(anchors):
        if snap.edge_id < 0 or snap.edge_id >= net.n_edges:
            raise GeometryError(f"Anchor refers to unknown edge {snap.edge_id}")
        if snap.vertex is not None:
            anchor_vertex[k] = snap.vertex
        else:
            interior.setdefault(snap.edge_id, {}).setdefault(snap.position, []).append(k)

    split = np.zeros(net.n_edges, dtype=bool)
    u_parts: List[np.ndarray] = []
    v_parts: List[np.ndarray] = []
    w_parts: List[np.ndarray] = []
    next_vertex = n
    for edge_id in sorted(interior):
        split[edge_id] = True
        u, v = (int(x) for x in net.edges[edge_id])
        positions = sorted(interior[edge_id])
        chain = [u]
        for position in positions:
            for k in interior[edge_id][position]:
                anchor_vertex[k] = next_vertex
            chain.append(next_vertex)
            next_vertex += 1
        chain.append(v)
        cuts = np.array([0.0, *positions, float(net.lengths[edge_id])])
        u_parts.append(np.array(chain[:-1], dtype=np.int64))
        v_parts.append(np.array(chain[1:], dtype=np.int64))
        w_parts.append(np.diff(cuts))

    keep = ~split
    u_all = np.concatenate([net.edges[keep, 0], *u_parts])
    v_all = np.concatenate([net.edges[keep, 1], *v_parts])
    w_all = np.concatenate([net.lengths[keep], *w_parts])
    adjacency = edge_list_to_csr(u_all, v_all, w_all, next_vertex)
    return AnchorGraph(adjacency=adjacency, n_network_vertices=n, anchor_vertex=anchor_vertex)


@dataclass
class DistanceMatrixBlock:
    """
    Network distances from a set of sources to a set of targets.

    Attributes:
        source_ids: Vertex ids of the rows
        target_ids: Vertex ids of the columns
        distances: (len(sources), len(targets)) meters; inf when unreachable or beyond cutoff
    """

    source_ids: np.ndarray
    target_ids: np.ndarray
    distances: np.ndarray

    def __post_init__(self):
        expected = (len(self.source_ids), len(self.target_ids))
        if self.distances.shape != expected:
            raise ValueError(f"distances have shape {self.distances.shape}, expected {expected}")


def _tree_batch(
    adjacency: sparse.csr_matrix, sources: np.ndarray, targets: Optional[np.ndarray], cutoff: float
) -> np.ndarray:
    dist = dijkstra(adjacency, directed=True, indices=sources, limit=cutoff)
    dist = np.atleast_2d(dist)
    if targets is not None:
        dist = dist[:, targets]
    dist[dist > cutoff] = np.inf
    return dist


def iter_tree_blocks(
    graph: AnchorGraph,
    sources: np.ndarray,
    cutoff: float,
    targets: Optional[np.ndarray] = None,
    workers: int = 1,
    batch_size: int = 64,
) -> Iterator[DistanceMatrixBlock]:
    """
    Grow truncated trees batch by batch.

    Blocks are yielded in source order whatever the worker count, so callers
    can stream pairs without holding the full matrix.

    Args:
        graph: Augmented graph
        sources: Source vertex ids
        cutoff: Largest distance kept (> 0)
        targets: Target vertex ids, or None for every vertex
        workers: Thread pool size
        batch_size: Sources per Dijkstra call
    """
    if not cutoff > 0:
        raise ValueError(f"cutoff must be > 0, got {cutoff}")
    sources = np.asarray(sources, dtype=np.int64)
    target_ids = (
        np.arange(graph.n_vertices, dtype=np.int64)
        if targets is None
        else np.asarray(targets, dtype=np.int64)
    )
    batches = [sources[i : i + batch_size] for i in range(0, len(sources), batch_size)]
    logger.log(
        STAGE,
        f"Shortest-path trees: {len(sources)} sources in {len(batches)} batches, "
        f"cutoff {cutoff:.1f} m, {workers} workers",
    )

    def run(batch: np.ndarray) -> DistanceMatrixBlock:
        dist = _tree_batch(graph.adjacency, batch, None if targets is None else target_ids, cutoff)
        return DistanceMatrixBlock(source_ids=batch, target_ids=target_ids, distances=dist)

    if workers <= 1 or len(batches) <= 1:
        for batch in batches:
            yield run(batch)
        return

    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order; at most `workers` batches in flight at once
        for start in range(0, len(batches), workers):
            yield from pool.map(run, batches[start : start + workers])


def shortest_path_trees(
    net: PedestrianNetwork,
    sources: Sequence[SnapResult],
    cutoff: float,
    targets: Optional[Sequence[SnapResult]] = None,
    workers: int = 1,
    batch_size: int = 64,
) -> DistanceMatrixBlock:
    """
    Network distance g from every source anchor to every target anchor within cutoff.

    With `targets` omitted the sources are also the targets. Distances are
    exact shortest-path lengths through the augmented graph.

    Example:
        >>> net = build_network([[(0, 0), (2, 0), (5, 0)]], snap_tolerance=0)
        >>> a, c = snap_many(np.array([[0.0, 0.0], [5.0, 0.0]]), net)
        >>> shortest_path_trees(net, [a], cutoff=10, targets=[c]).distances
        array([[5.]])
    """
    sources = list(sources)
    targets = sources if targets is None else list(targets)
    graph = anchor_graph(net, sources + targets)
    src = graph.anchor_vertex[: len(sources)]
    tgt = graph.anchor_vertex[len(sources) :]
    blocks = list(iter_tree_blocks(graph, src, cutoff, tgt, workers=workers, batch_size=batch_size))
    distances = (
        np.vstack([b.distances for b in blocks]) if blocks else np.zeros((0, len(tgt)))
    )
    return DistanceMatrixBlock(source_ids=src, target_ids=tgt, distances=distances)


def naive_dijkstra(
    adjacency: Sequence[Sequence[Tuple[int, float]]], source: int, cutoff: float = np.inf
) -> np.ndarray:
    """
    Textbook single-source Dijkstra with a binary heap and lazy deletion.

    Returns:
        Distances to every vertex; inf beyond cutoff or when unreachable
    """
    dist = np.full(len(adjacency), np.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = np.zeros(len(adjacency), dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adjacency[u]:
            nd = d + w
            if nd < dist[v] and nd <= cutoff:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


__all__ = [
    "AnchorGraph",
    "DistanceMatrixBlock",
    "anchor_graph",
    "iter_tree_blocks",
    "shortest_path_trees",
    "naive_dijkstra",
]
