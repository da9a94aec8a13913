"""Reading and writing graphs and block assignments.

Edge-list files hold one ``u v`` pair per line with 1-based labels. ``#`` starts
a comment. An optional ``n=<int>`` line fixes the node count; without it the
node count is the largest label seen.

Block files hold one 1-based block label per line (line ``u`` is node ``u``),
or a JSON array of labels.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

from .graph import BlockAssignment, Graph

_HEADER = re.compile(r"^n\s*=\s*(\d+)$")


class FormatError(ValueError):
    pass


def parse_edge_list(text: str) -> Graph:
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            n = int(m.group(1))
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"line {lineno}: node labels must be integers") from None
        if u < 1 or v < 1:
            raise FormatError(f"line {lineno}: node labels are 1-based")
        if u == v:
            raise FormatError(f"line {lineno}: self-loop {u}-{v}")
        edges.append((u - 1, v - 1))
    top = max((max(e) + 1 for e in edges), default=0)
    if n is None:
        n = top
    if n < 1:
        raise FormatError("empty edge list without an n=<int> header")
    if top > n:
        raise FormatError(f"edge label {top} exceeds n={n}")
    return Graph.from_edges(n, edges)


def format_edge_list(g: Graph) -> str:
    lines = [f"n={g.n}"]
    lines += [f"{u + 1} {v + 1}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: Graph, path) -> None:
    Path(path).write_text(format_edge_list(g))


def parse_blocks(text: str, k: int | None = None) -> BlockAssignment:
    stripped = text.strip()
    if stripped.startswith("["):
        labels = json.loads(stripped)
    else:
        labels = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise FormatError(f"line {lineno}: block label must be an integer") from None
    if not labels:
        raise FormatError("no block labels found")
    if min(labels) < 1:
        raise FormatError("block labels are 1-based")
    return BlockAssignment([x - 1 for x in labels], k=k)


def read_blocks(path, k: int | None = None) -> BlockAssignment:
    return parse_blocks(Path(path).read_text(), k=k)


def format_blocks(z: BlockAssignment) -> str:
    return "\n".join(str(int(x) + 1) for x in z.z) + "\n"


def write_blocks(z: BlockAssignment, path) -> None:
    Path(path).write_text(format_blocks(z))
