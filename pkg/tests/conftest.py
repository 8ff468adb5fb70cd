import numpy as np
import pytest

from ceafim.community import Partition
from ceafim.graph import AttributedGraph
from ceafim.selection import SelectionContext, pagerank

ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def random_graph(n, edge_prob, rng, q=2):
    """Erdos-Renyi graph with every node given a random group (all groups nonempty)."""
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < edge_prob
    labels = rng.integers(q, size=n)
    labels[:q] = np.arange(q)
    groups = [np.flatnonzero(labels == i) for i in range(q)]
    return AttributedGraph(n=n, edges=np.column_stack([iu[keep], ju[keep]]), labels=np.arange(n),
                           groups=tuple(groups))


@pytest.fixture
def figure_network():
    """Three communities laid out like the worked selection example.

    0-based ids: C1 = 0..6 (attributes a, b), C2 = 7..11 (a, b, c), C3 = 12..14 (d).
    Hubs: node 2 in C1; nodes 10 then 7 in C2; node 13 in C3.
    """
    edges = [(2, v) for v in (0, 1, 3, 4, 5, 6)] + [(0, 1), (4, 5)]
    edges += [(10, v) for v in (7, 8, 9, 11)] + [(7, v) for v in (8, 9, 11)] + [(8, 9)]
    edges += [(13, 12), (13, 14)]
    edges += [(6, 10), (11, 12)]
    groups = ([0, 1, 2, 3, 7, 8], [4, 5, 6, 9], [10, 11], [12, 13, 14])
    g = AttributedGraph.from_edges(15, edges, groups, ("a", "b", "c", "d"))
    part = Partition.from_assignment([0] * 7 + [1] * 5 + [2] * 3)
    scores = pagerank(g)
    return g, part, scores, SelectionContext(g, part, scores)
