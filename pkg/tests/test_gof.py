import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_graph
from exactsbm.gof import (chi2_bc, chi2_bc_batch, chi2_pearson, chi2_pearson_batch,
                          expected_block_degrees)
from exactsbm.graph import BlockAssignment, Graph
from exactsbm.models import ErParams, dyad_probabilities, mle_er


def chi2_bc_loop(g, z, q):
    a = g.adjacency()
    sizes = z.sizes()
    total = 0.0
    for u in range(g.n):
        for i in range(z.k):
            m = sum(int(a[u, v]) for v in range(g.n) if z.z[v] == i)
            e = sizes[i] * q[z.z[u], i]
            if np.isnan(e) or e == 0:
                assert m == 0
                continue
            total += (m - e) ** 2 / e
    return total


def pearson_loop(g, p):
    a = g.adjacency()
    return sum((p[u, v] - a[u, v]) ** 2 / p[u, v]
               for u in range(g.n) for v in range(u + 1, g.n) if p[u, v] > 0)


def test_fixture_chi2_bc_against_loop(fixture_graph, fixture_blocks):
    q = mle_er(fixture_graph, fixture_blocks).Q
    assert chi2_bc(fixture_graph, fixture_blocks, q) == pytest.approx(chi2_bc_loop(fixture_graph, fixture_blocks, q))


def test_fixture_pearson_against_loop(fixture_graph, fixture_blocks):
    p = dyad_probabilities(ErParams(np.nan_to_num(mle_er(fixture_graph, fixture_blocks).Q)), fixture_blocks)
    assert chi2_pearson(fixture_graph, fixture_blocks, p) == pytest.approx(pearson_loop(fixture_graph, p))


def test_expected_uses_full_block_size():
    z = BlockAssignment([0, 0, 1])
    e = expected_block_degrees([[0.5, 0.2], [0.2, 0.1]], z)
    assert e[0].tolist() == [1.0, 0.2]  # n_1 * q_11 with n_1 = 2, not n_1 - 1


def test_zero_expected_with_positive_observed():
    g = Graph.from_edges(3, [(0, 1)])
    z = BlockAssignment([0, 0, 1])
    with pytest.raises(ValueError):
        chi2_bc(g, z, [[0.0, 0.5], [0.5, 0.5]])
    with pytest.raises(ValueError):
        chi2_pearson(g, z, np.zeros((3, 3)))


def test_zero_cells_score_inf_on_request():
    z = BlockAssignment([0, 0, 1])
    states = np.array([[1, 0, 0], [0, 1, 0]], dtype=np.uint8)  # edge {0,1}, then edge {0,2}
    q = [[0.0, 0.5], [0.5, 0.5]]
    got = chi2_bc_batch(states, z, q, on_zero="inf")
    assert np.isinf(got[0]) and np.isfinite(got[1])
    fitted = np.array([0.0, 0.5, 0.5])
    got = chi2_pearson_batch(states, fitted, on_zero="inf")
    assert np.isinf(got[0]) and np.isfinite(got[1])
    with pytest.raises(ValueError):
        chi2_bc_batch(states, z, q, on_zero="ignore")


def test_perfect_fit_is_zero():
    g = Graph.complete(4)
    z = BlockAssignment([0, 0, 1, 1])
    p = dyad_probabilities(ErParams([[1.0, 1.0], [1.0, 1.0]]), z)
    assert chi2_pearson(g, z, p) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 12), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_batch_matches_loops(n, k, seed):
    rng = np.random.default_rng(seed)
    z = BlockAssignment(rng.integers(0, k, size=n), k=k)
    q = rng.uniform(0.05, 0.95, (k, k))
    q = (q + q.T) / 2
    graphs = [random_graph(rng, n, 0.5) for _ in range(4)]
    states = np.array([g.dyads for g in graphs])
    got = chi2_bc_batch(states, z, q)
    assert np.allclose(got, [chi2_bc_loop(g, z, q) for g in graphs])
    p = dyad_probabilities(ErParams(q), z)
    assert np.allclose(chi2_pearson_batch(states, p), [pearson_loop(g, p) for g in graphs])
