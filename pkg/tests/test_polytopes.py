import numpy as np
import pytest

from exactsbm.errors import DimensionError
from exactsbm.graph import BlockAssignment, Graph
from exactsbm.models import mle_er
from exactsbm.polytopes import (BOUNDARY, INTERIOR, OUTSIDE, add_inequalities, add_membership,
                                er_membership, mle_exists)


def test_er_box():
    assert er_membership([1, 2, 1], [2, 2]).verdict == BOUNDARY  # t_11 = C(2,2)
    assert er_membership([1, 2, 2], [3, 3]).verdict == INTERIOR
    v = er_membership([0, 5, 1], [2, 2])
    assert v.verdict == OUTSIDE and {"pair": [0, 1], "side": "upper"} in v.violated
    with pytest.raises(DimensionError):
        er_membership([1, 2], [2, 2])


def test_fixture_is_on_boundary(fixture_graph, fixture_blocks):
    ok, v = mle_exists("er", fixture_graph, fixture_blocks)
    assert not ok and v.verdict == BOUNDARY
    assert {"pair": [2, 2], "side": "upper"} in v.tight  # singleton block


def test_additive_inequality_count():
    assert len(list(add_inequalities([2, 3, 1]))) == 3 ** 3 - 1


def test_additive_fixture_verdict(fixture_blocks):
    v = add_membership((4, 8, 2), fixture_blocks.sizes())
    assert v.verdict == INTERIOR and v.parity_ok


def test_additive_extremes():
    sizes = [2, 2]
    # complete graph: every node has degree 3
    v = add_membership((6, 6), sizes)
    assert v.verdict == BOUNDARY
    assert add_membership((0, 0), sizes).verdict == BOUNDARY
    assert add_membership((7, 6), sizes).verdict == OUTSIDE
    assert not add_membership((3, 2), sizes).parity_ok


def test_mle_exists_rejects_beta(fixture_graph, fixture_blocks):
    with pytest.raises(ValueError):
        mle_exists("beta", fixture_graph, fixture_blocks)


def test_verdict_json():
    v = er_membership([1, 2, 2], [3, 3])
    assert v.to_json() == {"verdict": "interior", "tight": [], "violated": [], "parity_ok": True}


def test_interior_er_matches_open_interval():
    rng = np.random.default_rng(2)
    z = BlockAssignment(np.repeat([0, 1], [4, 4]))
    for _ in range(50):
        a = np.triu((rng.random((8, 8)) < rng.uniform(0.05, 0.95)).astype(int), 1)
        g = Graph.from_adjacency(a + a.T)
        q = mle_er(g, z).Q
        assert mle_exists("er", g, z)[0] == bool(np.all((q > 0) & (q < 1)))
