"""Test suite for the pedestrian network: building, snapping, shortest paths.

The accelerated shortest-path stage is checked against the plain heap
Dijkstra on random graphs. Run tests:

    pytest test/test_network.py -v
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import dijkstra

from accessibility.distances import EuclideanDistanceModel, NetworkDistanceModel
from core.errors import DistanceModelError, GeometryError, WashAccessError
from core.factory import DistanceModelFactory
from network.distance import pair_distance, pair_distances
from network.graph import PedestrianNetwork, build_network, edge_list_to_csr
from network.paths import (
    AnchorGraph,
    anchor_graph,
    iter_tree_blocks,
    naive_dijkstra,
    shortest_path_trees,
)
from network.snapping import snap, snap_many


def random_network(rng: np.random.Generator, n: int, integer_weights: bool) -> PedestrianNetwork:
    vertices = rng.uniform(0.0, 1000.0, size=(n, 2))
    m = int(rng.integers(max(1, n - 1), 3 * n + 1))
    u = rng.integers(0, n, size=m)
    v = (u + rng.integers(1, n, size=m)) % n
    if integer_weights:
        lengths = rng.integers(1, 60, size=m).astype(float)
    else:
        lengths = np.hypot(*(vertices[u] - vertices[v]).T)
    return PedestrianNetwork(vertices=vertices, edges=np.stack([u, v], 1), lengths=lengths)


def complete_network(points: np.ndarray) -> PedestrianNetwork:
    edges = np.array(list(itertools.combinations(range(len(points)), 2)))
    lengths = np.hypot(*(points[edges[:, 0]] - points[edges[:, 1]]).T)
    return PedestrianNetwork(vertices=points, edges=edges, lengths=lengths)


class TestBuildNetwork:
    """Polylines to graph."""

    def test_chained_edges(self):
        net = build_network([[(0, 0), (3, 0), (3, 4)]])
        assert net.n_vertices == 3
        assert net.lengths.tolist() == [3.0, 4.0]

    def test_vertices_within_tolerance_merge(self):
        net = build_network([[(0, 0), (10, 0)], [(10.3, 0), (20, 0)]], snap_tolerance=0.5)
        assert net.n_vertices == 3
        assert net.edges.tolist() == [[0, 1], [1, 2]]
        assert net.lengths[1] == pytest.approx(10.0)

    def test_collapsed_segments_dropped(self):
        net = build_network([[(0, 0), (0.2, 0), (5, 0)]], snap_tolerance=0.5)
        assert net.dropped_segments == 1
        assert net.n_edges == 1
        assert net.lengths[0] == pytest.approx(5.0)

    def test_zero_segments_rejected(self):
        with pytest.raises(GeometryError, match="zero footpath segments"):
            build_network([])

    def test_negative_tolerance_rejected(self):
        with pytest.raises(GeometryError):
            build_network([[(0, 0), (1, 0)]], snap_tolerance=-1.0)

    def test_parallel_edges_keep_shortest(self):
        csr = edge_list_to_csr(np.array([0, 1]), np.array([1, 0]), np.array([5.0, 3.0]), 2)
        assert csr[0, 1] == 3.0
        assert csr[1, 0] == 3.0

    def test_rebuild_is_identical(self):
        segments = [[(0, 0), (5, 5), (9, 1)], [(5, 5), (5, 12)]]
        a, b = build_network(segments), build_network(segments)
        np.testing.assert_array_equal(a.vertices, b.vertices)
        np.testing.assert_array_equal(a.edges, b.edges)


class TestSnapping:
    """Attaching points to the nearest edge."""

    def test_interior_anchor(self):
        net = build_network([[(0, 0), (10, 0)]])
        r = snap(4.0, 3.0, net)
        assert (r.edge_id, r.position, r.offset) == (0, 4.0, 3.0)
        assert (r.anchor_x, r.anchor_y) == (4.0, 0.0)
        assert not r.on_vertex

    def test_anchor_on_vertex(self):
        net = build_network([[(0, 0), (10, 0)]])
        r = snap(-2.0, 0.0, net)
        assert r.vertex == 0
        assert r.offset == 2.0
        assert r.position == 0.0

    def test_tie_goes_to_lowest_edge_id(self):
        net = build_network([[(0, 2), (10, 2)], [(0, 0), (10, 0)]], snap_tolerance=0)
        assert snap(5.0, 1.0, net).edge_id == 0

    def test_empty_network_rejected(self):
        net = PedestrianNetwork(vertices=np.zeros((0, 2)), edges=np.zeros((0, 2)), lengths=np.zeros(0))
        with pytest.raises(GeometryError):
            snap(0.0, 0.0, net)

    def test_snap_many_keeps_order(self):
        net = build_network([[(0, 0), (10, 0), (10, 10)]])
        results = snap_many(np.array([[11.0, 5.0], [3.0, -1.0]]), net)
        assert [r.edge_id for r in results] == [1, 0]


class TestPairDistance:
    """Offset-adjusted pair distance rule."""

    def test_examples(self):
        assert pair_distance(200.0, 5.0, 7.0, 100.0) == 112.0
        assert pair_distance(10.0, 5.0, 7.0, 100.0) == 10.0
        assert pair_distance(12.0, 5.0, 7.0, 100.0) == 112.0
        assert pair_distance(20.0, 5.0, 7.0, float("inf")) == float("inf")

    def test_random_tuples(self):
        """1,000 random tuples follow the rule exactly, scalar and vectorized alike."""
        rng = np.random.default_rng(7)
        n = 1000
        e = rng.uniform(0.0, 500.0, n)
        s_i = rng.uniform(0.0, 200.0, n)
        s_j = rng.uniform(0.0, 200.0, n)
        g = rng.uniform(0.0, 2000.0, n)
        g[rng.random(n) < 0.1] = np.inf
        e[:50] = s_i[:50] + s_j[:50]

        vectorized = pair_distances(e, s_i, s_j, g)
        for k in range(n):
            expected = e[k] if e[k] < s_i[k] + s_j[k] else g[k] + (s_i[k] + s_j[k])
            assert pair_distance(e[k], s_i[k], s_j[k], g[k]) == expected
            assert vectorized[k] == expected


class TestShortestPaths:
    """Truncated trees against the reference Dijkstra."""

    def test_integer_weights_match_reference_exactly(self):
        """100 random graphs up to 500 vertices, bitwise equal distances."""
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(2, 501))
            net = random_network(rng, n, integer_weights=True)
            graph = AnchorGraph(
                adjacency=net.to_csr(), n_network_vertices=n, anchor_vertex=np.arange(n)
            )
            sources = rng.choice(n, size=min(n, 4), replace=False)
            cutoff = float(rng.integers(5, 200)) + 0.5
            blocks = list(iter_tree_blocks(graph, sources, cutoff, workers=2, batch_size=3))
            fast = np.vstack([b.distances for b in blocks])
            lists = graph.adjacency_lists()
            for row, s in enumerate(sources):
                np.testing.assert_array_equal(fast[row], naive_dijkstra(lists, int(s), cutoff))

    def test_snapped_anchors_match_reference(self):
        rng = np.random.default_rng(12)
        for _ in range(30):
            n = int(rng.integers(3, 200))
            net = random_network(rng, n, integer_weights=False)
            points = rng.uniform(0.0, 1000.0, size=(6, 2))
            anchors = snap_many(points, net)
            cutoff = 600.0
            result = shortest_path_trees(net, anchors, cutoff, batch_size=2)
            graph = anchor_graph(net, anchors)
            lists = graph.adjacency_lists()
            for row, v in enumerate(graph.anchor_vertex):
                expected = naive_dijkstra(lists, int(v), cutoff)[graph.anchor_vertex]
                np.testing.assert_allclose(result.distances[row], expected, rtol=1e-12)

    def test_matches_networkx(self):
        nx = pytest.importorskip("networkx")
        rng = np.random.default_rng(13)
        net = random_network(rng, 150, integer_weights=False)
        graph = AnchorGraph(adjacency=net.to_csr(), n_network_vertices=150, anchor_vertex=np.arange(150))
        g = nx.from_scipy_sparse_array(graph.adjacency)
        block = next(iter_tree_blocks(graph, np.array([0]), cutoff=800.0))
        expected = nx.single_source_dijkstra_path_length(g, 0, cutoff=800.0, weight="weight")
        finite = np.flatnonzero(np.isfinite(block.distances[0]))
        assert set(finite.tolist()) == set(expected)
        for v in finite:
            assert block.distances[0, v] == pytest.approx(expected[int(v)], rel=1e-12)

    def test_split_edges(self):
        net = build_network([[(0, 0), (10, 0)]])
        a, b = snap_many(np.array([[3.0, 1.0], [7.0, -1.0]]), net)
        result = shortest_path_trees(net, [a], cutoff=100.0, targets=[b])
        assert result.distances[0, 0] == pytest.approx(4.0)

    def test_cutoff_truncates(self):
        net = build_network([[(0, 0), (10, 0), (20, 0)]], snap_tolerance=0)
        graph = AnchorGraph(adjacency=net.to_csr(), n_network_vertices=3, anchor_vertex=np.arange(3))
        block = next(iter_tree_blocks(graph, np.array([0]), cutoff=15.0))
        np.testing.assert_array_equal(block.distances[0], [0.0, 10.0, np.inf])

    def test_invalid_cutoff(self):
        net = build_network([[(0, 0), (10, 0)]])
        graph = AnchorGraph(adjacency=net.to_csr(), n_network_vertices=2, anchor_vertex=np.arange(2))
        with pytest.raises(ValueError):
            next(iter_tree_blocks(graph, np.array([0]), cutoff=0.0))

    def test_block_order_independent_of_workers(self):
        rng = np.random.default_rng(14)
        net = random_network(rng, 120, integer_weights=False)
        graph = AnchorGraph(adjacency=net.to_csr(), n_network_vertices=120, anchor_vertex=np.arange(120))
        sources = np.arange(0, 120, 3)
        one = np.vstack([b.distances for b in iter_tree_blocks(graph, sources, 500.0, batch_size=4)])
        many = np.vstack(
            [b.distances for b in iter_tree_blocks(graph, sources, 500.0, workers=4, batch_size=4)]
        )
        np.testing.assert_array_equal(one, many)


class TestAddEdge:
    """Adding a footpath can only shorten walks."""

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_never_lengthens_any_distance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 60))
        net = random_network(rng, n, integer_weights=True)
        u, v = rng.choice(n, size=2, replace=False)
        before = dijkstra(net.to_csr(), directed=False)
        wider = net.add_edge(int(u), int(v), float(rng.integers(1, 60)))
        after = dijkstra(wider.to_csr(), directed=False)
        assert wider.n_edges == net.n_edges + 1
        assert np.all(after <= before)
        assert after[u, v] <= wider.lengths[-1]

    def test_shortcut(self):
        net = build_network([[(0, 0), (10, 0), (20, 0), (30, 0)]])
        ends = [int(np.flatnonzero(net.vertices[:, 0] == x)[0]) for x in (0.0, 30.0)]
        assert dijkstra(net.to_csr(), directed=False)[ends[0], ends[1]] == pytest.approx(30.0)
        wider = net.add_edge(*ends, length=10.0)
        assert dijkstra(wider.to_csr(), directed=False)[ends[0], ends[1]] == pytest.approx(10.0)
        assert net.n_edges == 3

    def test_default_length_is_planar(self):
        net = build_network([[(0, 0), (3, 0)], [(3, 0), (3, 4)]])
        ends = [int(np.flatnonzero((net.vertices == p).all(1))[0]) for p in ([0.0, 0.0], [3.0, 4.0])]
        assert net.add_edge(*ends).lengths[-1] == pytest.approx(5.0)


class TestDistanceModels:
    """Catchment pairs from the two distance modes."""

    def test_factory(self):
        assert "euclidean" in DistanceModelFactory.list_modes()
        assert isinstance(DistanceModelFactory.create_model("euclidean"), EuclideanDistanceModel)
        with pytest.raises(ValueError, match="Unknown distance mode"):
            DistanceModelFactory.create_model("manhattan")
        with pytest.raises(RuntimeError) as info:
            DistanceModelFactory.create_model("network")
        assert isinstance(info.value, WashAccessError)
        assert isinstance(info.value, DistanceModelError)

    def test_register_and_unregister(self):
        class StraightLine(EuclideanDistanceModel):
            def __init__(self):
                super().__init__(name="straight")

        assert not DistanceModelFactory.is_registered("straight")
        DistanceModelFactory.register_model("straight", StraightLine)
        try:
            assert DistanceModelFactory.is_registered("straight")
            assert DistanceModelFactory.create_model("straight").name == "straight"
            with pytest.raises(ValueError, match="already registered"):
                DistanceModelFactory.register_model("straight", StraightLine)
        finally:
            DistanceModelFactory.unregister_model("straight")
        assert not DistanceModelFactory.is_registered("straight")
        with pytest.raises(KeyError):
            DistanceModelFactory.unregister_model("straight")
        with pytest.raises(TypeError):
            DistanceModelFactory.register_model("bad", dict)

    def test_complete_graph_matches_euclidean(self):
        """On a complete graph with points on vertices, network and straight-line distances agree."""
        rng = np.random.default_rng(21)
        points = rng.uniform(0.0, 500.0, size=(30, 2))
        net = complete_network(points)
        demand, supply = points[:20], points[20:]
        by_network = NetworkDistanceModel(net).catchment_pairs(demand, supply, 10_000.0)
        by_line = EuclideanDistanceModel().catchment_pairs(demand, supply, 10_000.0)
        assert len(by_network) == len(by_line) == 200
        np.testing.assert_allclose(by_network.to_dense(), by_line.to_dense(), rtol=1e-12)

    def test_straight_line_fallback(self):
        """Points closer than their two offsets use the straight-line gap."""
        net = build_network([[(0, 100), (100, 100)]])
        pairs = NetworkDistanceModel(net).catchment_pairs(
            np.array([[0.0, 0.0]]), np.array([[5.0, 0.0]]), 1000.0
        )
        assert pairs.to_dense()[0, 0] == pytest.approx(5.0)

    def test_offsets_added_to_network_distance(self):
        net = build_network([[(0, 100), (100, 100)]])
        pairs = NetworkDistanceModel(net).catchment_pairs(
            np.array([[0.0, 90.0]]), np.array([[100.0, 90.0]]), 1000.0
        )
        assert pairs.to_dense()[0, 0] == pytest.approx(120.0)

    def test_disconnected_pair_excluded(self):
        net = build_network([[(0, 0), (10, 0)], [(500, 0), (510, 0)]])
        pairs = NetworkDistanceModel(net).catchment_pairs(
            np.array([[0.0, 1.0]]), np.array([[510.0, 1.0]]), 1609.0
        )
        assert len(pairs) == 0

    def test_tree_side_does_not_change_pairs(self):
        """Growing trees from demand or from supply yields the same pairs."""
        rng = np.random.default_rng(22)
        net = random_network(rng, 80, integer_weights=False)
        few = rng.uniform(0, 1000, size=(3, 2))
        many = rng.uniform(0, 1000, size=(25, 2))
        model = NetworkDistanceModel(net, workers=2, batch_size=4)
        ab = model.catchment_pairs(few, many, 700.0).to_dense()
        ba = model.catchment_pairs(many, few, 700.0).to_dense()
        np.testing.assert_allclose(ab, ba.T, rtol=1e-12)

    def test_invalid_worker_count(self):
        net = build_network([[(0, 0), (10, 0)]])
        with pytest.raises(ValueError):
            NetworkDistanceModel(net, workers=0)
