import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ceafim.community import Partition
from ceafim.errors import ContractViolation
from ceafim.graph import AttributedGraph
from ceafim.selection import (CommunityExhausted, NodeScores, SelectionContext, SelectionState,
                              pagerank, select_community, select_fair_node, select_node,
                              weighted_draw)

from .conftest import random_graph


def linear_pagerank(graph, d=0.85):
    """Closed form: solve (I - d M) x = (1 - d) / n with column-stochastic M."""
    n = graph.n
    a = np.zeros((n, n))
    for u, v in graph.edges:
        a[u, v] = a[v, u] = 1.0
    m = a / a.sum(axis=0, keepdims=True)
    return np.linalg.solve(np.eye(n) - d * m, np.full(n, (1 - d) / n))


def test_pagerank_cycle_uniform():
    g = AttributedGraph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)], [range(6)])
    assert np.allclose(pagerank(g).sn, 1 / 6, atol=1e-9)


def test_pagerank_star_closed_form():
    g = AttributedGraph.from_edges(4, [(0, 1), (0, 2), (0, 3)], [range(4)])
    ref = linear_pagerank(g)
    sn = pagerank(g, eps=1e-12, max_iters=1000).sn
    assert np.allclose(sn, ref, atol=1e-9)
    assert sn[0] == pytest.approx(0.4797, abs=1e-4) and sn[1] == pytest.approx(0.1734, abs=1e-4)


def test_pagerank_matches_networkx():
    rng = np.random.default_rng(3)
    g = random_graph(40, 0.1, rng)
    ref = nx.Graph()
    ref.add_nodes_from(range(g.n))
    ref.add_edges_from(map(tuple, g.edges))
    nxr = nx.pagerank(ref, alpha=0.85, tol=1e-12, max_iter=1000)
    sn = pagerank(g, eps=1e-12, max_iters=1000).sn
    assert np.allclose(sn, [nxr[v] for v in range(g.n)], atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_pagerank_distribution_and_relabel_invariance(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(2, 25)), 0.2, rng)
    sn = pagerank(g).sn
    assert sn.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.all(sn > 0)
    perm = rng.permutation(g.n)
    h = AttributedGraph.from_edges(g.n, perm[g.edges], [range(g.n)])
    assert np.allclose(pagerank(h).sn[perm], sn, atol=1e-12)


def test_pagerank_nonconvergence_warns():
    g = AttributedGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)], [range(5)])
    with pytest.warns(RuntimeWarning):
        pagerank(g, eps=1e-15, max_iters=2)


def test_top_breaks_ties_by_lower_id():
    s = NodeScores(np.array([0.1, 0.3, 0.3, 0.2]))
    assert list(s.top(np.array([3, 2, 1, 0]), 3)) == [1, 2, 3]


def test_figure_fixture_hubs(figure_network):
    _, part, scores, _ = figure_network
    assert list(scores.top(part.communities[0], 1)) == [2]
    assert list(scores.top(part.communities[1], 2)) == [10, 7]
    assert list(scores.top(part.communities[2], 1)) == [13]


def test_initial_scores(figure_network):
    *_, ctx = figure_network
    state = SelectionState(ctx)
    assert np.array_equal(state.urgencies, np.ones(4))
    # |C1| * 2 attributes, |C2| * 3, |C3| * 1
    assert list(state.community_scores) == [14, 15, 3]


def test_urgency_after_covering_c2(figure_network):
    *_, ctx = figure_network
    state = SelectionState(ctx)
    assert state.cover(1)
    assert not state.cover(1)
    ua, ub, uc, ud = state.urgencies
    assert ua == pytest.approx(np.exp(-1 / 3), abs=1e-12)
    assert ub == pytest.approx(np.exp(-1 / 4), abs=1e-12)
    assert uc == pytest.approx(np.exp(-1), abs=1e-12)
    assert ud == 1.0
    assert state.community_scores[2] == 3
    assert state.community_scores[0] == pytest.approx(7 * (ua + ub), abs=1e-12)


def test_urgency_monotone_under_cover(figure_network):
    *_, ctx = figure_network
    state = SelectionState(ctx)
    prev = state.urgencies.copy()
    for t in (2, 0, 1):
        state.cover(t)
        assert np.all(state.urgencies <= prev + 1e-15)
        prev = state.urgencies.copy()
    assert np.allclose(state.urgencies, np.exp(-1))


def test_weighted_draw_edges():
    rng = np.random.default_rng(0)
    assert {weighted_draw(np.array([0.0, 2.0, 0.0]), rng) for _ in range(100)} == {1}


def three_sigma(hits, trials, prob):
    return abs(hits / trials - prob) < 3 * np.sqrt(prob * (1 - prob) / trials)


def test_select_community_frequencies(figure_network):
    *_, ctx = figure_network
    rng = np.random.default_rng(11)
    trials = 100_000
    draws = np.array([select_community(SelectionState(ctx), rng) for _ in range(trials)])
    for t, w in enumerate([14, 15, 3]):
        assert three_sigma(np.sum(draws == t), trials, w / 32)


def test_select_community_respects_availability(figure_network):
    *_, ctx = figure_network
    rng = np.random.default_rng(12)
    avail = np.array([True, True, False])
    trials = 50_000
    draws = np.array([select_community(SelectionState(ctx), rng, avail) for _ in range(trials)])
    assert not np.any(draws == 2)
    assert three_sigma(np.sum(draws == 1), trials, 15 / 29)


def test_select_node_frequencies(figure_network):
    _, part, scores, ctx = figure_network
    rng = np.random.default_rng(13)
    state = SelectionState(ctx)
    trials = 100_000
    draws = np.array([select_node(state, scores, 1, rng) for _ in range(trials)])
    members = part.communities[1]
    probs = scores.sn[members] / scores.sn[members].sum()
    for v, prob in zip(members, probs):
        assert three_sigma(np.sum(draws == v), trials, prob)


def test_select_node_two_to_one():
    g = AttributedGraph.from_edges(2, [(0, 1)], [[0, 1]])
    ctx = SelectionContext(g, Partition.from_assignment([0, 0]), NodeScores(np.array([2.0, 1.0])))
    rng = np.random.default_rng(14)
    trials = 100_000
    hits = sum(select_node(SelectionState(ctx), ctx.scores, 0, rng) == 0 for _ in range(trials))
    assert three_sigma(hits, trials, 2 / 3)


def test_select_node_exclusion(figure_network):
    _, _, scores, ctx = figure_network
    rng = np.random.default_rng(1)
    state = SelectionState(ctx)
    assert {select_node(state, scores, 2, rng, exclude={12, 13}) for _ in range(20)} == {14}
    with pytest.raises(CommunityExhausted):
        select_node(state, scores, 2, rng, exclude={12, 13, 14})


def test_select_fair_node_skips_exhausted(figure_network):
    _, _, scores, ctx = figure_network
    rng = np.random.default_rng(2)
    for _ in range(200):
        state = SelectionState(ctx)
        v = select_fair_node(state, scores, rng, exclude={12, 13, 14})
        assert v < 12
        assert state.selected == [v] and state.covered[ctx.community_of[v]]
    with pytest.raises(ContractViolation):
        select_fair_node(SelectionState(ctx), scores, rng, exclude=set(range(15)))


def test_uniform_fallback_when_all_scores_vanish():
    # one community whose attribute is already fully covered still gets drawn
    g = AttributedGraph.from_edges(3, [(0, 1)], [[0, 1, 2]])
    ctx = SelectionContext(g, Partition.from_assignment([0, 0, 1]), pagerank(g))
    state = SelectionState(ctx, [0, 2])
    assert np.all(state.community_scores > 0)
    rng = np.random.default_rng(0)
    zero = SelectionState(ctx)
    zero.community_scores = np.zeros(2)
    assert select_community(zero, rng) in (0, 1)
