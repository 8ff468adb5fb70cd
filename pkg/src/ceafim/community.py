"""Louvain community detection and Newman modularity."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ValidationError
from .graph import AttributedGraph

__all__ = ["Partition", "louvain", "modularity"]

MIN_PASS_GAIN = 1e-7
_TIE_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint cover of the node set. ``assignment[v]`` is the community of ``v``."""

    assignment: np.ndarray
    communities: tuple

    @classmethod
    def from_assignment(cls, assignment) -> "Partition":
        raw = np.asarray(assignment, dtype=np.int64)
        if raw.ndim != 1:
            raise ValidationError("assignment must be one-dimensional")
        # relabel so community ids follow the smallest member id
        _, first = np.unique(raw, return_index=True)
        order = raw[np.sort(first)]
        relabel = {int(c): i for i, c in enumerate(order)}
        assignment = np.array([relabel[int(c)] for c in raw], dtype=np.int64)
        communities = tuple(np.flatnonzero(assignment == c) for c in range(len(order)))
        for c in communities:
            c.flags.writeable = False
        assignment.flags.writeable = False
        return cls(assignment, communities)

    @property
    def community_count(self) -> int:
        return len(self.communities)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.communities], dtype=np.int64)

    def to_json(self) -> dict:
        return {"assignment": [int(c) for c in self.assignment]}

    @classmethod
    def from_json(cls, data: dict) -> "Partition":
        return cls.from_assignment(data["assignment"])


def modularity(graph: AttributedGraph, partition: Partition) -> float:
    """Newman modularity with resolution 1; an edgeless graph scores 0."""
    w = graph.edge_count
    if len(partition.assignment) != graph.n:
        raise ValidationError("partition does not match graph size")
    if w == 0:
        return 0.0
    a = partition.assignment
    m = partition.community_count
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    internal = np.bincount(a[u][a[u] == a[v]], minlength=m)
    degree_sum = np.bincount(a, weights=graph.degree, minlength=m)
    return float(np.sum(internal / w - (degree_sum / (2.0 * w)) ** 2))


def _level_modularity(adj, comm, total_weight):
    k = len(adj)
    internal: dict = {}
    tot: dict = {}
    for i in range(k):
        ci = comm[i]
        deg = 0.0
        for j, wt in adj[i].items():
            if j == i:
                deg += 2 * wt
                internal[ci] = internal.get(ci, 0.0) + wt
            else:
                deg += wt
                if comm[j] == ci and j > i:
                    internal[ci] = internal.get(ci, 0.0) + wt
        tot[ci] = tot.get(ci, 0.0) + deg
    m2 = 2.0 * total_weight
    return sum(internal.get(c, 0.0) / total_weight - (t / m2) ** 2 for c, t in tot.items())


def _one_level(adj, degrees, total_weight, rng, pass_log):
    k = len(adj)
    comm = list(range(k))
    tot = list(degrees)
    m2 = 2.0 * total_weight
    order = rng.permutation(k)
    current = _level_modularity(adj, comm, total_weight)
    while True:
        for i in order:
            i = int(i)
            ci = comm[i]
            ki = degrees[i]
            links: dict = {}
            for j, wt in adj[i].items():
                if j != i:
                    links[comm[j]] = links.get(comm[j], 0.0) + wt
            tot[ci] -= ki
            best = ci
            best_gain = links.get(ci, 0.0) - tot[ci] * ki / m2
            for c in sorted(links):
                if c == ci:
                    continue
                gain = links[c] - tot[c] * ki / m2
                if gain > best_gain + _TIE_EPS:
                    best, best_gain = c, gain
            tot[best] += ki
            comm[i] = best
        after = _level_modularity(adj, comm, total_weight)
        if pass_log is not None:
            pass_log.append(after)
        gained = after - current
        current = after
        if gained < MIN_PASS_GAIN:
            break
    return comm


def _aggregate(adj, comm):
    ids = {c: i for i, c in enumerate(sorted(set(comm)))}
    new_adj = [dict() for _ in ids]
    for i, nbrs in enumerate(adj):
        ci = ids[comm[i]]
        for j, wt in nbrs.items():
            if j < i:
                continue
            cj = ids[comm[j]]
            if ci == cj:
                new_adj[ci][ci] = new_adj[ci].get(ci, 0.0) + wt
            else:
                new_adj[ci][cj] = new_adj[ci].get(cj, 0.0) + wt
                new_adj[cj][ci] = new_adj[cj].get(ci, 0.0) + wt
    return new_adj, [ids[c] for c in comm]


def louvain(graph: AttributedGraph, rng_seed: int = 0,
            pass_log: Optional[list] = None) -> Partition:
    """Multi-level Louvain modularity optimisation.

    Node visit order at each level is a permutation drawn from ``rng_seed``.
    A node only leaves its community for a strictly better gain; among equally
    good targets the lowest community index wins. If ``pass_log`` is given, the
    modularity after every local-move pass is appended to it.
    """
    if graph.n == 0:
        raise ValidationError("louvain needs at least one node")
    rng = np.random.default_rng(rng_seed)
    node_comm = np.arange(graph.n)
    if graph.edge_count == 0:
        return Partition.from_assignment(node_comm)

    adj = [dict() for _ in range(graph.n)]
    for u, v in graph.edges:
        adj[u][int(v)] = 1.0
        adj[v][int(u)] = 1.0
    total_weight = float(graph.edge_count)

    while True:
        degrees = [sum(2 * wt if j == i else wt for j, wt in nbrs.items())
                   for i, nbrs in enumerate(adj)]
        comm = _one_level(adj, degrees, total_weight, rng, pass_log)
        if len(set(comm)) == len(adj):
            break
        adj, level_map = _aggregate(adj, comm)
        node_comm = np.asarray(level_map)[node_comm]
    return Partition.from_assignment(node_comm)
