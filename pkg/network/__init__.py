"""Pedestrian network: graph building, snapping and truncated shortest paths."""

from network.distance import pair_distance, pair_distances
from network.graph import PedestrianNetwork, build_network, edge_list_to_csr
from network.paths import (
    AnchorGraph,
    DistanceMatrixBlock,
    anchor_graph,
    iter_tree_blocks,
    naive_dijkstra,
    shortest_path_trees,
)
from network.snapping import SnapResult, offsets_of, snap, snap_many

__all__ = [
    "PedestrianNetwork",
    "build_network",
    "edge_list_to_csr",
    "SnapResult",
    "snap",
    "snap_many",
    "offsets_of",
    "AnchorGraph",
    "DistanceMatrixBlock",
    "anchor_graph",
    "iter_tree_blocks",
    "shortest_path_trees",
    "naive_dijkstra",
    "pair_distance",
    "pair_distances",
]
