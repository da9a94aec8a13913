import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from exactsbm.errors import DimensionError
from exactsbm.graph import (BlockAssignment, Graph, Model, block_edge_matrix, degrees_into_blocks,
                            dyad_index, num_dyads, pair_index, sufficient_statistic, t_add,
                            t_beta, t_er)


def test_fixture_statistics(fixture_graph, fixture_blocks):
    assert t_er(fixture_graph, fixture_blocks).values == (0, 4, 0, 1, 2, 0)
    assert t_add(fixture_graph, fixture_blocks).values == (4, 8, 2)
    assert t_beta(fixture_graph, fixture_blocks).values == (0, 4, 0, 1, 2, 0, 2, 2, 3, 2, 3, 2)


def test_node_one_block_degrees(fixture_graph, fixture_blocks):
    assert degrees_into_blocks(fixture_graph, fixture_blocks)[0].tolist() == [0, 2, 0]


def test_dyad_index_is_row_major():
    n = 5
    seen = [dyad_index(u, v, n) for u in range(n) for v in range(u + 1, n)]
    assert seen == list(range(num_dyads(n)))
    assert dyad_index(3, 1, n) == dyad_index(1, 3, n)
    with pytest.raises(ValueError):
        dyad_index(2, 2, n)


def test_pair_index_matches_order():
    k = 4
    idx = [pair_index(i, j, k) for i in range(k) for j in range(i, k)]
    assert idx == list(range(k * (k + 1) // 2))
    assert pair_index(2, 1, k) == pair_index(1, 2, k)


def test_graph_validation():
    with pytest.raises(DimensionError):
        Graph(4, [0, 1])
    with pytest.raises(ValueError):
        Graph.from_adjacency(np.eye(3, dtype=int))
    with pytest.raises(ValueError):
        Graph.from_adjacency(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 3)])


def test_graph_is_immutable_and_hashable():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(ValueError):
        g.dyads[0] = 0
    h = g.with_dyads(set_on=[(1, 2)], set_off=[(0, 1)])
    assert g.num_edges == 2 and h.edges() == [(1, 2), (2, 3)]
    assert Graph.from_edges(4, [(1, 0), (3, 2)]) == g
    assert len({g, Graph.from_edges(4, [(0, 1), (2, 3)])}) == 1


def test_dimension_mismatch(fixture_graph):
    with pytest.raises(DimensionError):
        t_er(fixture_graph, BlockAssignment([0, 1, 0]))


def test_block_assignment_canonical():
    z = BlockAssignment([2, 2, 0, 1], k=4)
    c = z.canonical()
    assert c.z.tolist() == [0, 0, 1, 2] and c.k == 4
    assert z.empty_blocks() == [3]
    with pytest.raises(ValueError):
        BlockAssignment([0, 3], k=2)
    with pytest.raises(ValueError):
        BlockAssignment.from_blocks([[0, 1], [1]])


def test_model_parse():
    assert Model.parse("ER-SBM") is Model.ER
    assert Model.parse("additive") is Model.ADD
    assert Model.parse("beta-SBM") is Model.BETA
    with pytest.raises(ValueError):
        Model.parse("poisson")


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_statistics_agree_with_loops(n, k, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.4)
    z = BlockAssignment(rng.integers(0, k, size=n), k=k)
    a = g.adjacency()
    counts = np.zeros((k, k), dtype=int)
    for u in range(n):
        for v in range(u + 1, n):
            if a[u, v]:
                i, j = sorted((z.z[u], z.z[v]))
                counts[i, j] += 1
    er = tuple(counts[i, j] for i in range(k) for j in range(i, k))
    assert t_er(g, z).values == er
    c = block_edge_matrix(g, z)
    assert np.array_equal(c, c.T)
    add = [sum(int(a[u].sum()) for u in range(n) if z.z[u] == i) for i in range(k)]
    assert list(t_add(g, z).values) == add
    assert sum(t_add(g, z).values) == 2 * g.num_edges


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_relabeling_nodes_permutes_statistics(n, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.5)
    z = BlockAssignment(rng.integers(0, 3, size=n), k=3)
    perm = rng.permutation(n)
    zp = np.empty(n, dtype=int)
    zp[perm] = z.z
    h = g.relabel(perm)
    for model in Model:
        a = sufficient_statistic(g, z, model).values
        b = sufficient_statistic(h, BlockAssignment(zp, k=3), model).values
        if model is Model.BETA:
            er = len(a) - n
            assert a[:er] == b[:er]
            assert [a[er + u] for u in range(n)] == [b[er + perm[u]] for u in range(n)]
        else:
            assert a == b
