import pytest

from exactsbm.graph import BlockAssignment, Graph
from exactsbm.io import (FormatError, format_blocks, format_edge_list, parse_blocks,
                         parse_edge_list, read_blocks, read_edge_list, write_blocks,
                         write_edge_list)


def test_edge_list_round_trip(tmp_path, fixture_graph):
    path = tmp_path / "g.txt"
    write_edge_list(fixture_graph, path)
    assert read_edge_list(path) == fixture_graph
    assert format_edge_list(fixture_graph).startswith("n=6\n")


def test_edge_list_header_and_comments():
    g = parse_edge_list("# comment\nn=5\n1 2  # trailing\n\n2 3\n")
    assert g.n == 5 and g.edges() == [(0, 1), (1, 2)]
    assert parse_edge_list("1 4\n").n == 4


@pytest.mark.parametrize("text", ["1 2 3\n", "a b\n", "0 1\n", "2 2\n", "n=2\n1 3\n", "# nothing\n"])
def test_edge_list_errors(text):
    with pytest.raises(FormatError):
        parse_edge_list(text)


def test_blocks_formats(tmp_path):
    z = BlockAssignment([0, 0, 1, 2])
    assert parse_blocks(format_blocks(z)) == z
    assert parse_blocks("[1, 1, 2, 3]") == z
    write_blocks(z, tmp_path / "b.txt")
    assert read_blocks(tmp_path / "b.txt") == z
    assert parse_blocks("1\n2\n", k=3).k == 3
    with pytest.raises(FormatError):
        parse_blocks("0\n1\n")
    with pytest.raises(FormatError):
        parse_blocks("x\n")


def test_karate_fixture_shape():
    from pathlib import Path
    g = read_edge_list(Path(__file__).parent / "data" / "karate.txt")
    assert isinstance(g, Graph) and g.n == 34 and g.num_edges == 78
