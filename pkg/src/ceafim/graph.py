"""Attributed undirected graphs, plain-text loaders and the block-model generator."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CoverageError, ParseError, UnknownNodeError, ValidationError

__all__ = [
    "AttributedGraph",
    "SbmSpec",
    "load_edge_list",
    "load_groups",
    "write_edge_list",
    "write_groups",
    "generate_sbm",
    "induced_subgraph",
    "karate_club",
    "synth2_spec",
    "synth3_spec",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Immutable undirected graph over dense node ids ``0..n-1`` with group memberships.

    ``labels[v]`` is the external id of node ``v`` (what the input file called it);
    ``groups[i]`` is the sorted array of nodes in group ``i`` and ``group_labels[i]``
    its external id. A node may sit in several groups.
    """

    n: int
    edges: np.ndarray
    labels: np.ndarray
    groups: tuple = ()
    group_labels: tuple = ()
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise UnknownNodeError("edge endpoint outside 0..n-1")
            if np.any(edges[:, 0] == edges[:, 1]):
                bad = edges[edges[:, 0] == edges[:, 1]][0]
                raise ValidationError(f"self-loop on node {int(bad[0])}")
            edges = np.sort(edges, axis=1)
            edges = np.unique(edges, axis=0)
        object.__setattr__(self, "edges", _frozen(edges))

        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (self.n,):
            raise ValidationError("labels must have one entry per node")
        object.__setattr__(self, "labels", _frozen(labels))

        groups = tuple(_frozen(np.unique(np.asarray(g, dtype=np.int64))) for g in self.groups)
        group_labels = tuple(self.group_labels) or tuple(range(len(groups)))
        if len(group_labels) != len(groups):
            raise ValidationError("one label per group required")
        if groups:
            covered = np.zeros(self.n, dtype=bool)
            for i, g in enumerate(groups):
                if g.size == 0:
                    raise ValidationError(f"group {group_labels[i]!r} is empty")
                if g[0] < 0 or g[-1] >= self.n:
                    raise UnknownNodeError(f"group {group_labels[i]!r} references unknown node")
                covered[g] = True
            if not covered.all():
                missing = int(np.flatnonzero(~covered)[0])
                raise CoverageError(f"node {int(labels[missing])} belongs to no group")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "group_labels", group_labels)

        # CSR adjacency, neighbours sorted ascending
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.lexsort((dst, src))
        counts = np.bincount(src, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        object.__setattr__(self, "indptr", _frozen(indptr))
        object.__setattr__(self, "indices", _frozen(dst[order]))

    @classmethod
    def from_edges(cls, n: int, edges, groups: Sequence[Iterable[int]] = (), group_labels=()):
        edges = np.array([tuple(e) for e in edges], dtype=np.int64).reshape(-1, 2)
        groups = tuple(np.array(sorted(g), dtype=np.int64) for g in groups)
        return cls(n=n, edges=edges, labels=np.arange(n), groups=groups,
                   group_labels=tuple(group_labels))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def group_count(self) -> int:
        return len(self.groups)

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def group_sizes(self) -> np.ndarray:
        return np.array([len(g) for g in self.groups], dtype=np.int64)

    def membership(self) -> np.ndarray:
        """Boolean ``(n, q)`` matrix; entry ``[v, i]`` is true when ``v`` is in group ``i``."""
        m = np.zeros((self.n, self.group_count), dtype=bool)
        for i, g in enumerate(self.groups):
            m[g, i] = True
        return m

    def with_groups(self, groups, group_labels=()) -> "AttributedGraph":
        return AttributedGraph(n=self.n, edges=self.edges, labels=self.labels,
                               groups=tuple(groups), group_labels=tuple(group_labels))

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self.edges}

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.int64(self.n).tobytes())
        h.update(self.edges.tobytes())
        h.update(self.labels.tobytes())
        for label, g in zip(self.group_labels, self.groups):
            h.update(repr(label).encode())
            h.update(g.tobytes())
        return h.hexdigest()

    def index_of(self, label: int) -> int:
        """Dense id of the node whose external id is ``label``."""
        pos = int(np.searchsorted(self.labels, label))
        if pos >= self.n or self.labels[pos] != label:
            raise UnknownNodeError(f"unknown node id {label}")
        return pos


def _int_tokens(line: str, lineno: int, path) -> list:
    try:
        return [int(t) for t in line.split()]
    except ValueError:
        raise ParseError(f"{path}: expected integers, got {line.strip()!r}", lineno) from None


def load_edge_list(path) -> AttributedGraph:
    """Read ``"<u> <v>"`` lines into an undirected graph without groups.

    Arbitrary integer ids are compacted to ``0..n-1`` in ascending id order.
    A line holding a single id declares a node without forcing an edge, which is
    how isolated nodes survive a write/read round trip. Duplicate and reversed
    edges collapse to one.
    """
    path = Path(path)
    nodes: set = set()
    pairs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            toks = _int_tokens(stripped, lineno, path)
            if len(toks) == 1:
                nodes.add(toks[0])
                continue
            if len(toks) != 2:
                raise ParseError(f"{path}: expected 2 ids per line, got {len(toks)}", lineno)
            u, v = toks
            if u == v:
                raise ValidationError(f"{path}: line {lineno}: self-loop on node {u}")
            nodes.update((u, v))
            pairs.append((u, v))
    labels = np.array(sorted(nodes), dtype=np.int64)
    if pairs:
        raw = np.array(pairs, dtype=np.int64)
        edges = np.searchsorted(labels, raw)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
    return AttributedGraph(n=len(labels), edges=edges, labels=labels)


def load_groups(graph: AttributedGraph, path, column: int = 0) -> AttributedGraph:
    """Attach group memberships read from ``"<node_id> <group_id> [...]"`` lines.

    ``column`` picks which group column to read when a file carries several
    attributes per node. A node listed on several lines joins every group named.
    """
    path = Path(path)
    members: dict = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            toks = _int_tokens(stripped, lineno, path)
            if len(toks) < column + 2:
                raise ParseError(f"{path}: no group column {column}", lineno)
            try:
                v = graph.index_of(toks[0])
            except UnknownNodeError as exc:
                raise UnknownNodeError(f"{path}: line {lineno}: {exc}") from None
            members.setdefault(toks[column + 1], set()).add(v)
    group_labels = tuple(sorted(members))
    groups = tuple(np.array(sorted(members[g]), dtype=np.int64) for g in group_labels)
    if graph.n and not groups:
        raise CoverageError(f"{path}: no group assignments")
    return graph.with_groups(groups, group_labels)


def write_edge_list(graph: AttributedGraph, path) -> None:
    degree = graph.degree
    with Path(path).open("w", encoding="utf-8") as fh:
        for v in np.flatnonzero(degree == 0):
            fh.write(f"{graph.labels[v]}\n")
        for u, v in graph.edges:
            fh.write(f"{graph.labels[u]} {graph.labels[v]}\n")


def write_groups(graph: AttributedGraph, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for label, g in zip(graph.group_labels, graph.groups):
            for v in g:
                fh.write(f"{graph.labels[v]} {label}\n")


@dataclass(frozen=True)
class SbmSpec:
    group_sizes: tuple
    prob_matrix: tuple
    seed: int = 0

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.group_sizes)
        if not sizes or min(sizes) < 1:
            raise ValidationError("group_sizes must be a nonempty list of counts >= 1")
        probs = np.asarray(self.prob_matrix, dtype=float)
        q = len(sizes)
        if probs.shape != (q, q):
            raise ValidationError(f"prob_matrix must be {q}x{q}")
        if not np.all((probs >= 0) & (probs <= 1)):
            raise ValidationError("probabilities must lie in [0, 1]")
        if not np.array_equal(probs, probs.T):
            raise ValidationError("prob_matrix must be symmetric")
        object.__setattr__(self, "group_sizes", sizes)
        object.__setattr__(self, "prob_matrix", tuple(tuple(float(x) for x in row) for row in probs))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_dict(cls, d: dict) -> "SbmSpec":
        missing = {"group_sizes", "prob_matrix"} - set(d)
        if missing:
            raise ValidationError(f"SbmSpec missing fields: {sorted(missing)}")
        return cls(tuple(d["group_sizes"]), tuple(map(tuple, d["prob_matrix"])), d.get("seed", 0))

    @classmethod
    def from_json(cls, path) -> "SbmSpec":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc.msg}", exc.lineno) from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"group_sizes": list(self.group_sizes),
                "prob_matrix": [list(r) for r in self.prob_matrix], "seed": self.seed}

    def expected_edges(self) -> float:
        sizes = np.array(self.group_sizes, dtype=float)
        probs = np.array(self.prob_matrix)
        pairs = np.outer(sizes, sizes)
        np.fill_diagonal(pairs, sizes * (sizes - 1) / 2)
        return float(np.triu(pairs * probs).sum())


def synth2_spec(seed: int = 7) -> SbmSpec:
    """Two groups of 350 and 150 nodes, 0.025 within and 0.001 across groups."""
    return SbmSpec((350, 150), ((0.025, 0.001), (0.001, 0.025)), seed)


def synth3_spec(seed: int = 7) -> SbmSpec:
    return SbmSpec((300, 125, 75),
                   ((0.025, 0.001, 0.0005), (0.001, 0.025, 0.0005), (0.0005, 0.0005, 0.025)), seed)


def generate_sbm(spec: SbmSpec) -> AttributedGraph:
    """Sample a stochastic block model; block ``i`` becomes group ``i``."""
    sizes = np.array(spec.group_sizes)
    n = int(sizes.sum())
    block = np.repeat(np.arange(len(sizes)), sizes)
    probs = np.array(spec.prob_matrix)
    rng = np.random.default_rng(spec.seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < probs[block[iu], block[ju]]
    edges = np.column_stack([iu[keep], ju[keep]])
    starts = np.concatenate([[0], np.cumsum(sizes)])
    groups = tuple(np.arange(starts[i], starts[i + 1]) for i in range(len(sizes)))
    return AttributedGraph(n=n, edges=edges, labels=np.arange(n), groups=groups,
                           group_labels=tuple(range(len(sizes))))


def induced_subgraph(graph: AttributedGraph, nodes) -> tuple:
    """Return ``(subgraph, old_ids)`` where ``old_ids[new] == old``.

    Groups are restricted to the node set; groups left empty are dropped.
    """
    old_ids = np.unique(np.array(list(nodes), dtype=np.int64))
    if old_ids.size and (old_ids[0] < 0 or old_ids[-1] >= graph.n):
        raise UnknownNodeError("induced_subgraph: node outside graph")
    new_of = np.full(graph.n, -1, dtype=np.int64)
    new_of[old_ids] = np.arange(old_ids.size)
    e = graph.edges
    keep = (new_of[e[:, 0]] >= 0) & (new_of[e[:, 1]] >= 0) if e.size else np.zeros(0, dtype=bool)
    edges = new_of[e[keep]] if e.size else np.empty((0, 2), dtype=np.int64)
    groups, labels = [], []
    for label, g in zip(graph.group_labels, graph.groups):
        inside = new_of[g]
        inside = inside[inside >= 0]
        if inside.size:
            groups.append(inside)
            labels.append(label)
    sub = AttributedGraph(n=int(old_ids.size), edges=edges, labels=graph.labels[old_ids],
                          groups=tuple(groups), group_labels=tuple(labels))
    return sub, old_ids


def karate_club() -> AttributedGraph:
    """Zachary's karate club with the two post-split factions as groups."""
    data = resources.files("ceafim") / "data"
    with resources.as_file(data / "karate.edges") as edges_path:
        g = load_edge_list(edges_path)
    with resources.as_file(data / "karate.groups") as groups_path:
        return load_groups(g, groups_path)
