import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import blocks_1based, graph_1based, random_graph
from exactsbm.errors import InapplicableMoveError
from exactsbm.graph import BlockAssignment, sufficient_statistic
from exactsbm.moves import Move, apply, propose_add, propose_beta, propose_er, propose_many, validate


def m1(add=(), remove=()):
    """Move from 1-based dyads."""
    return Move(add=[(u - 1, v - 1) for u, v in add], remove=[(u - 1, v - 1) for u, v in remove])


def test_linear_move_on_fixture(fixture_graph, fixture_blocks):
    mv = m1(add=[(2, 3)], remove=[(1, 5)])
    assert validate(mv, fixture_graph, fixture_blocks, "er")
    h = apply(fixture_graph, mv)
    assert sufficient_statistic(h, fixture_blocks, "er").values == (0, 4, 0, 1, 2, 0)


def test_quadratic_move_on_fixture(fixture_graph, fixture_blocks):
    mv = m1(add=[(2, 6), (4, 5)], remove=[(2, 4), (5, 6)])
    assert validate(mv, fixture_graph, fixture_blocks, "add")
    assert not validate(mv, fixture_graph, fixture_blocks, "er")


def test_cubic_move_on_fixture(fixture_graph, fixture_blocks):
    mv = m1(add=[(2, 3), (4, 5), (4, 6)], remove=[(2, 4), (3, 4), (5, 6)])
    assert mv.degree == 3
    assert validate(mv, fixture_graph, fixture_blocks, "beta")


def test_inapplicable_move(fixture_graph, fixture_blocks):
    mv = m1(add=[(1, 3)], remove=[(1, 2)])
    assert not mv.is_applicable(fixture_graph)
    assert not validate(mv, fixture_graph, fixture_blocks, "er")
    with pytest.raises(InapplicableMoveError):
        apply(fixture_graph, mv)


def test_move_construction():
    with pytest.raises(ValueError):
        Move(add=[(0, 1)], remove=[(1, 0)])
    with pytest.raises(ValueError):
        Move(add=[(2, 2)])
    mv = Move(add=[(3, 1)], remove=[(0, 2)])
    assert Move.from_json(mv.to_json()) == mv
    assert mv.to_json() == {"add": [[2, 4]], "remove": [[1, 3]]}
    assert mv.reversed().reversed() == mv


def test_single_proposals_are_valid(fixture_graph, fixture_blocks):
    rng = np.random.default_rng(1)
    for propose, model in ((propose_er, "er"), (propose_add, "add"), (propose_beta, "beta")):
        for _ in range(50):
            mv = propose(fixture_graph, fixture_blocks, rng)
            if mv is not None:
                assert validate(mv, fixture_graph, fixture_blocks, model)


@settings(max_examples=30, deadline=None)
@given(st.integers(4, 14), st.integers(1, 3), st.sampled_from(["er", "add", "beta"]),
       st.integers(0, 2**32 - 1))
def test_proposals_preserve_statistic(n, k, model, seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, 0.45)
    z = BlockAssignment(rng.integers(0, k, size=n), k=k)
    for mv in propose_many(g, z, model, 300, rng):
        if mv is not None:
            assert validate(mv, g, z, model)


def _proposal_counts(g, z, model, count, seed):
    out = {}
    for mv in propose_many(g, z, model, count, np.random.default_rng(seed)):
        if mv is not None:
            out[mv] = out.get(mv, 0) + 1
    return out


@pytest.mark.parametrize("model", ["er", "add", "beta"])
def test_proposal_symmetry(model):
    """P(g -> h) equals P(h -> g) for every proposed move, up to Monte Carlo error."""
    g = graph_1based(6, [(2, 5), (3, 6), (1, 5), (1, 3), (2, 4), (3, 4), (5, 6)])
    z = blocks_1based([[1, 2], [3, 4, 5], [6]])
    count = 200_000
    fwd = _proposal_counts(g, z, model, count, 11)
    checked = 0
    for mv, c in sorted(fwd.items(), key=lambda kv: -kv[1])[:5]:
        h = apply(g, mv)
        back = _proposal_counts(h, z, model, count, 12).get(mv.reversed(), 0)
        p, q = c / count, back / count
        se = np.sqrt((p + q) / count)
        assert abs(p - q) < 5 * se + 1e-4
        checked += 1
    assert checked > 0
