"""Field generation and communication graph tests.

The adjacency oracle is the quadratic all-pairs distance check; BFS is
checked against scipy's unweighted shortest_path on the same adjacency.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from skeleton_nav.field import (
    CommGraph,
    SensorField,
    adjacency_text,
    build_comm_graph,
    connectivity_census,
    field_text,
    generate_field,
    hop_bfs,
    load_field,
    nearest_node,
    save_field,
)

INF = math.inf


def brute_adjacency(field: SensorField) -> tuple[tuple[int, ...], ...]:
    """All-pairs oracle: edge iff Euclidean distance <= radio range."""
    diff = field.positions[:, None, :] - field.positions[None, :, :]
    d = np.hypot(diff[..., 0], diff[..., 1])
    lists = []
    for i in range(field.n):
        near = np.flatnonzero(d[i] <= field.radio_range)
        lists.append(tuple(int(v) for v in near if v != i))
    return tuple(lists)


def scipy_hops(graph: CommGraph, source: int, keep=None) -> list[float]:
    """Hop distances via scipy on the (optionally restricted) adjacency."""
    if keep is None:
        keep = set(range(graph.n))
    rows, cols = [], []
    for u in range(graph.n):
        if u not in keep:
            continue
        for v in graph.adj[u]:
            if v in keep:
                rows.append(u)
                cols.append(v)
    mat = csr_matrix((np.ones(len(rows)), (rows, cols)),
                     shape=(graph.n, graph.n))
    dist = shortest_path(mat, method="D", unweighted=True, indices=source)
    out = dist.tolist()
    for v in range(graph.n):
        if v not in keep:
            out[v] = INF
    return out


def test_field_dimensions_and_bounds():
    f = generate_field(256, 3.0, 1)
    assert f.n == 256
    assert f.side == 16.0
    assert f.positions.shape == (256, 2)
    assert f.positions.dtype == np.float64
    assert np.all(f.positions >= 0.0)
    assert np.all(f.positions <= f.side)


def test_field_positions_are_read_only():
    f = generate_field(64, 3.0, 0)
    with pytest.raises(ValueError):
        f.positions[0, 0] = 5.0


def test_field_matches_reference_generator():
    # the documented contract: positions come straight from numpy's
    # default_rng(seed).uniform over the square, in one draw
    f = generate_field(128, 3.0, 42)
    expect = np.random.default_rng(42).uniform(0.0, math.sqrt(128),
                                               size=(128, 2))
    assert np.array_equal(f.positions, expect)


def test_field_regeneration_is_bit_identical():
    a = generate_field(512, 3.0, 7)
    b = generate_field(512, 3.0, 7)
    assert np.array_equal(a.positions, b.positions)
    c = generate_field(512, 3.0, 8)
    assert not np.array_equal(a.positions, c.positions)


def test_generate_field_rejects_bad_inputs():
    with pytest.raises(ValueError):
        generate_field(3, 3.0, 0)
    with pytest.raises(ValueError):
        generate_field(64, 0.0, 0)
    with pytest.raises(ValueError):
        generate_field(64, -1.0, 0)


def test_sensor_field_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        SensorField(n=4, side=2.0, radio_range=1.0, seed=0,
                    positions=np.zeros((3, 2)))


def test_adjacency_matches_allpairs_oracle():
    rng = np.random.default_rng(0)
    for seed in range(50):
        n = int(rng.integers(16, 257))
        f = generate_field(n, 3.0, seed)
        g = build_comm_graph(f)
        assert g.adj == brute_adjacency(f), f"adjacency mismatch at seed {seed}"


def test_exact_range_edge_is_included():
    # separations of exactly r and of r + 1 on hand-placed sensors
    pos = np.array([[0.0, 0.0], [3.0, 0.0], [7.0, 0.0], [7.0, 3.0]])
    f = SensorField(n=4, side=10.0, radio_range=3.0, seed=0, positions=pos)
    g = build_comm_graph(f)
    assert g.adj == ((1,), (0,), (3,), (2,))


def test_adjacency_sorted_without_self_loops(graph_cache):
    g = graph_cache(256, 3.0, 3)
    for i, nbrs in enumerate(g.adj):
        assert i not in nbrs
        assert list(nbrs) == sorted(nbrs)
    assert g.edge_count() == sum(len(a) for a in g.adj) // 2
    assert g.degree(0) == len(g.adj[0])
    assert g.neighbors(5) == g.adj[5]


def test_hop_bfs_matches_scipy_oracle():
    for seed in range(10):
        g = build_comm_graph(generate_field(128, 3.0, seed))
        dist, _ = hop_bfs(g, 0)
        assert dist == scipy_hops(g, 0)


def test_hop_bfs_with_blocked_matches_restricted_oracle():
    for seed in range(5):
        g = build_comm_graph(generate_field(128, 3.0, seed))
        blocked = {v for v in range(g.n) if v % 5 == 0 and v != 3}
        keep = set(range(g.n)) - blocked
        dist, _ = hop_bfs(g, 3, blocked)
        assert dist == scipy_hops(g, 3, keep)
        # callable form behaves identically to the set form
        dist2, _ = hop_bfs(g, 3, lambda v: v % 5 == 0 and v != 3)
        assert dist2 == dist


def test_hop_bfs_parent_is_lowest_predecessor(graph_cache):
    g = graph_cache(256, 3.0, 3)
    dist, parent = hop_bfs(g, 0)
    for v in range(g.n):
        if dist[v] in (0, INF):
            assert parent[v] == -1
            continue
        preds = [u for u in g.adj[v] if dist[u] == dist[v] - 1]
        assert parent[v] == min(preds)


def test_hop_bfs_distance_changes_by_one_per_edge(graph_cache):
    g = graph_cache(256, 3.0, 3)
    dist, _ = hop_bfs(g, 0)
    for u in range(g.n):
        for v in g.adj[u]:
            if dist[u] != INF and dist[v] != INF:
                assert abs(dist[u] - dist[v]) <= 1


def test_hop_bfs_rejects_bad_sources(graph_cache):
    g = graph_cache(256, 3.0, 3)
    with pytest.raises(ValueError):
        hop_bfs(g, -1)
    with pytest.raises(ValueError):
        hop_bfs(g, g.n)
    with pytest.raises(ValueError):
        hop_bfs(g, 4, {4})


def test_nearest_node_brute_force(graph_cache):
    g = graph_cache(256, 3.0, 3)
    f = g.field
    rng = np.random.default_rng(1)
    for _ in range(25):
        p = tuple(rng.uniform(0.0, f.side, size=2))
        d = np.hypot(f.positions[:, 0] - p[0], f.positions[:, 1] - p[1])
        assert nearest_node(f, p) == int(np.argmin(d))


def test_nearest_node_tie_and_candidates():
    pos = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 5.0], [8.0, 8.0]])
    f = SensorField(n=4, side=10.0, radio_range=3.0, seed=0, positions=pos)
    # (1, 0) is equidistant from sensors 0 and 1: lowest id wins
    assert nearest_node(f, (1.0, 0.0)) == 0
    assert nearest_node(f, (1.0, 0.0), candidates=[2, 1]) == 1
    with pytest.raises(ValueError):
        nearest_node(f, (1.0, 0.0), candidates=[])


def test_save_load_round_trip(tmp_path):
    f = generate_field(100, 3.0, 11)
    path = tmp_path / "field.txt"
    save_field(f, path)
    f2 = load_field(path)
    assert (f2.n, f2.side, f2.radio_range, f2.seed) == \
        (f.n, f.side, f.radio_range, f.seed)
    assert np.array_equal(f2.positions, f.positions)
    # the text itself is stable across dumps
    assert field_text(f2) == field_text(f)


def test_adjacency_text_is_stable(graph_cache):
    g = graph_cache(256, 3.0, 3)
    g2 = build_comm_graph(g.field)
    assert adjacency_text(g) == adjacency_text(g2)


def test_connectivity_census_contrast():
    # at density 1, r=3 connects everything; r=1 essentially never does
    assert connectivity_census(64, 3.0, range(10)) == 1.0
    assert connectivity_census(64, 1.0, range(10)) == 0.0
