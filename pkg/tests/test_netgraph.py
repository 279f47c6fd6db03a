import itertools
import math
from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from manetcds.netgraph import (GraphError, NeighborTable, brute_force_min_cds, build_udg, dumps,
                               induces_connected, is_cds, is_dominating, loads, neighbor_tables,
                               random_connected_udg)


def bfs_depths(adj, src):
    depth = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in depth:
                depth[v] = depth[u] + 1
                q.append(v)
    return depth


def test_edge_needs_strictly_smaller_distance():
    g = build_udg({1: (0, 0), 2: (250, 0), 3: (0, 249.999)}, 250)
    assert g.neighbors(1) == {3}
    assert 2 not in g.neighbors(1)


@pytest.mark.parametrize("bad", [0, -1, math.inf, math.nan])
def test_bad_range_rejected(bad):
    with pytest.raises(GraphError):
        build_udg({1: (0, 0)}, bad)


def test_bad_input_rejected():
    with pytest.raises(GraphError):
        build_udg([(1, 0, 0), (1, 5, 5)], 10)
    with pytest.raises(GraphError):
        build_udg({1: (0, math.nan)}, 10)
    with pytest.raises(GraphError):
        build_udg({}, 10)


def test_isolated_node_and_tables():
    g = build_udg({1: (0, 0), 2: (10, 0), 3: (500, 500)}, 50)
    t = neighbor_tables(g)
    assert t.n1_open[3] == frozenset()
    assert t.n1_closed(1) == {1, 2}
    assert not g.is_connected()


def test_asymmetric_adjacency_rejected():
    with pytest.raises(GraphError):
        NeighborTable.from_adjacency({1: {2}, 2: set()})
    with pytest.raises(GraphError):
        NeighborTable.from_adjacency({1: {1}})


def test_roundtrip_text_format():
    g = random_connected_udg(15, seed=3)
    h = loads(dumps(g))
    assert h.positions == g.positions and h.adjacency == g.adjacency
    with pytest.raises(GraphError):
        loads("3 250\n1 0 0\n")


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10**6))
def test_neighbor_tables_match_bfs_depth(n, seed):
    g = random_connected_udg(n, (600, 600), 250, seed=seed)
    t = neighbor_tables(g)
    for u in g.node_ids:
        d = bfs_depths(g.adjacency, u)
        assert t.n1_open[u] == {v for v, k in d.items() if k == 1}
        assert t.n2[u] == {v for v, k in d.items() if k == 2}


def test_empty_and_singleton_sets_count_as_connected():
    g = build_udg({1: (0, 0), 2: (1, 0)}, 5)
    assert induces_connected(g, [])
    assert induces_connected(g, [2])
    assert is_dominating(g, [1])
    assert not is_dominating(g, [])


def _exhaustive_min_cds_size(g):
    ids = g.node_ids
    best = None
    for mask in range(1, 1 << len(ids)):
        s = [u for i, u in enumerate(ids) if mask >> i & 1]
        if is_cds(g, s) and (best is None or len(s) < best):
            best = len(s)
    return best


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6))
def test_brute_force_agrees_with_exhaustive_enumeration(n, seed):
    g = random_connected_udg(n, (500, 500), 250, seed=seed)
    got = brute_force_min_cds(g)
    assert is_cds(g, got)
    assert len(got) == _exhaustive_min_cds_size(g)


def test_brute_force_lexicographic_tie_break():
    # path 1-2-3-4: the unique optimum is {2, 3}; a star returns its center
    path = build_udg({1: (0, 0), 2: (10, 0), 3: (20, 0), 4: (30, 0)}, 11)
    assert brute_force_min_cds(path) == {2, 3}
    square = NeighborTable.from_adjacency({1: {2, 4}, 2: {1, 3}, 3: {2, 4}, 4: {1, 3}})
    assert brute_force_min_cds(square) == {1, 2}


def test_brute_force_limits():
    with pytest.raises(GraphError):
        brute_force_min_cds(random_connected_udg(13, (300, 300), 250, seed=1))
    with pytest.raises(GraphError):
        brute_force_min_cds(build_udg({1: (0, 0), 2: (100, 0)}, 10))
