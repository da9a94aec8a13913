import numpy as np
import pytest

from exactsbm.graph import BlockAssignment, Graph

# Six-node fixture used throughout: seven edges, blocks {1,2}, {3,4,5}, {6} (1-based).
FIXTURE_EDGES = [(2, 5), (3, 6), (1, 5), (1, 3), (2, 4), (3, 4), (5, 6)]
FIXTURE_BLOCKS = [[1, 2], [3, 4, 5], [6]]

ACCEPTANCE_LINES = []


def graph_1based(n, edges):
    return Graph.from_edges(n, [(u - 1, v - 1) for u, v in edges])


def blocks_1based(blocks):
    return BlockAssignment.from_blocks([[u - 1 for u in b] for b in blocks])


def edit(edges, remove=(), add=()):
    """Edge list with ``remove`` taken out and ``add`` put in (all 1-based)."""
    drop = {tuple(sorted(e)) for e in remove}
    kept = [e for e in edges if tuple(sorted(e)) not in drop]
    return kept + [tuple(e) for e in add]


@pytest.fixture
def fixture_graph():
    return graph_1based(6, FIXTURE_EDGES)


@pytest.fixture
def fixture_blocks():
    return blocks_1based(FIXTURE_BLOCKS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_graph(rng, n, p):
    a = np.triu((rng.random((n, n)) < p).astype(np.uint8), 1)
    return Graph.from_adjacency(a + a.T)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
