"""Community-then-node sampling driven by attribute urgency and PageRank.

A :class:`SelectionContext` holds everything fixed for a network (partition,
per-community attribute counts, node scores). A :class:`SelectionState` is the
mutable part: which communities already host a selected node, and the
urgencies and community scores that follow from that.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .community import Partition
from .errors import ContractViolation, ValidationError
from .graph import AttributedGraph

__all__ = [
    "NodeScores",
    "SelectionContext",
    "SelectionState",
    "CommunityExhausted",
    "pagerank",
    "attribute_urgency",
    "community_scores",
    "select_community",
    "select_node",
    "select_fair_node",
    "weighted_draw",
]

DAMPING = 0.85
TOLERANCE = 1e-6
MAX_ITERS = 100


class CommunityExhausted(ContractViolation):
    """Every member of the requested community is excluded."""


@dataclass(frozen=True, eq=False)
class NodeScores:
    sn: np.ndarray

    def top(self, nodes: np.ndarray, count: int) -> np.ndarray:
        """The ``count`` highest-scoring of ``nodes``; equal scores go to the lower id."""
        order = np.lexsort((nodes, -self.sn[nodes]))
        return nodes[order[:count]]


def pagerank(graph: AttributedGraph, d: float = DAMPING, eps: float = TOLERANCE,
             max_iters: int = MAX_ITERS) -> NodeScores:
    """Power iteration on the undirected graph; rank mass of isolated nodes is spread uniformly."""
    n = graph.n
    if n == 0:
        raise ValidationError("pagerank needs a nonempty graph")
    if not 0.0 < d < 1.0:
        raise ValidationError("damping must lie strictly between 0 and 1")
    degree = graph.degree.astype(float)
    src = np.repeat(np.arange(n), graph.degree)
    dst = graph.indices
    dangling = degree == 0
    inv_deg = np.divide(1.0, degree, out=np.zeros(n), where=~dangling)
    x = np.full(n, 1.0 / n)
    for _ in range(max_iters):
        spread = np.bincount(dst, weights=(x * inv_deg)[src], minlength=n)
        nxt = d * spread + (d * x[dangling].sum() + 1.0 - d) / n
        change = np.abs(nxt - x).sum()
        x = nxt
        if change < eps:
            break
    else:
        warnings.warn(f"pagerank did not reach tolerance {eps} in {max_iters} iterations",
                      RuntimeWarning, stacklevel=2)
    x.flags.writeable = False
    return NodeScores(x)


class SelectionContext:
    """Static per-network inputs of the sampler."""

    def __init__(self, graph: AttributedGraph, partition: Partition, scores: NodeScores):
        if graph.group_count == 0:
            raise ValidationError("selection needs group memberships")
        if len(partition.assignment) != graph.n:
            raise ValidationError("partition does not match graph")
        self.n = graph.n
        self.partition = partition
        self.scores = scores
        self.community_of = partition.assignment
        self.members = partition.communities
        self.sizes = partition.sizes.astype(float)
        # attr_counts[t, j]: nodes of community t carrying attribute j
        self.attr_counts = np.zeros((partition.community_count, graph.group_count))
        np.add.at(self.attr_counts, partition.assignment, graph.membership().astype(float))
        self.attr_totals = self.attr_counts.sum(axis=0)
        self.has_attr = self.attr_counts > 0

    @property
    def community_count(self) -> int:
        return len(self.members)

    def available(self, exclude) -> np.ndarray:
        """Mask of communities with at least one node outside ``exclude``."""
        if not exclude:
            return np.ones(self.community_count, dtype=bool)
        taken = np.bincount(self.community_of[np.fromiter(exclude, dtype=np.int64)],
                            minlength=self.community_count)
        return taken < self.sizes


class SelectionState:
    def __init__(self, context: SelectionContext, selected: Iterable[int] = ()):
        self.context = context
        self.selected: list = []
        self.covered = np.zeros(context.community_count, dtype=bool)
        for v in selected:
            self.selected.append(int(v))
            self.covered[context.community_of[v]] = True
        self.refresh()

    def refresh(self) -> None:
        ctx = self.context
        self.urgencies = np.exp(-(self.covered @ ctx.attr_counts) / ctx.attr_totals)
        self.community_scores = ctx.sizes * (ctx.has_attr @ self.urgencies)

    def cover(self, community: int) -> bool:
        """Mark a community as hosting a selected node; True if that was new."""
        if self.covered[community]:
            return False
        self.covered[community] = True
        self.refresh()
        return True

    def add(self, node: int) -> None:
        self.selected.append(int(node))
        self.cover(int(self.context.community_of[node]))


def attribute_urgency(state: SelectionState) -> np.ndarray:
    return state.urgencies


def community_scores(state: SelectionState, available: Optional[np.ndarray] = None) -> np.ndarray:
    """Community scores with communities outside ``available`` forced to zero."""
    if available is None:
        return state.community_scores
    return np.where(available, state.community_scores, 0.0)


def weighted_draw(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Index drawn with probability proportional to ``weights`` (one uniform variate)."""
    cum = np.cumsum(weights)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    if idx >= len(weights) or weights[idx] <= 0:
        idx = int(np.flatnonzero(weights > 0)[-1])
    return idx


def select_community(state: SelectionState, rng: np.random.Generator,
                     available: Optional[np.ndarray] = None) -> int:
    """Draw a community proportionally to its score, then cover it.

    Falls back to a uniform draw over ``available`` communities when all scores
    vanish.
    """
    sc = community_scores(state, available)
    if sc.sum() <= 0:
        allowed = np.ones(len(sc), dtype=bool) if available is None else available
        if not allowed.any():
            raise ContractViolation("no community available")
        sc = allowed.astype(float)
    t = weighted_draw(sc, rng)
    state.cover(t)
    return t


def select_node(state: SelectionState, scores: NodeScores, community: int,
                rng: np.random.Generator, exclude=()) -> int:
    members = state.context.members[community]
    if exclude:
        members = members[~np.isin(members, np.fromiter(exclude, dtype=np.int64))]
    if members.size == 0:
        raise CommunityExhausted(f"community {community} has no eligible node")
    return int(members[weighted_draw(scores.sn[members], rng)])


def select_fair_node(state: SelectionState, scores: NodeScores, rng: np.random.Generator,
                     exclude=()) -> int:
    """Pick a community, then a node inside it; the node joins ``state.selected``."""
    exclude = set(exclude)
    if len(exclude) >= state.context.n:
        raise ContractViolation("every node is excluded")
    available = state.context.available(exclude)
    t = select_community(state, rng, available)
    v = select_node(state, scores, t, rng, exclude)
    state.add(v)
    return v
