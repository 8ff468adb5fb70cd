"""Independent-cascade influence estimation over pre-sampled live-edge graphs."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, ValidationError
from .graph import AttributedGraph, induced_subgraph
from .seeding import GROUP_ENSEMBLE, derive_seed

__all__ = [
    "LiveEdgeEnsemble",
    "InfluenceEstimate",
    "sample_ensemble",
    "estimate_influence",
    "direct_ic_counts",
    "direct_ic_simulate",
    "greedy_celf",
    "greedy_naive",
    "group_ensemble",
    "group_seed_budgets",
    "group_baselines",
]

DEFAULT_SAMPLES = 1000
_DRAW_CHUNK = 4_000_000


@dataclass(frozen=True, eq=False)
class LiveEdgeEnsemble:
    """``sample_count`` live-edge graphs of an ``n``-node graph.

    All samples live in one block-diagonal CSR structure over global ids
    ``s * n + v``; ``arc_sample``/``arc_src``/``arc_dst`` list the same arcs with
    local node ids.
    """

    n: int
    p: float
    sample_count: int
    rng_seed: int
    arc_sample: np.ndarray
    arc_src: np.ndarray
    arc_dst: np.ndarray
    indptr: np.ndarray = field(repr=False)
    targets: np.ndarray = field(repr=False)

    @property
    def arc_count(self) -> int:
        return len(self.arc_src)

    def sample_arcs(self, s: int) -> np.ndarray:
        """``(a, 2)`` array of the arcs kept in sample ``s``."""
        lo, hi = np.searchsorted(self.arc_sample, [s, s + 1])
        return np.column_stack([self.arc_src[lo:hi], self.arc_dst[lo:hi]])

    def reached(self, seeds) -> np.ndarray:
        """Boolean ``(sample_count, n)`` matrix of nodes reachable from ``seeds``."""
        seeds = np.asarray(seeds, dtype=np.int64)
        n, delta = self.n, self.sample_count
        visited = np.zeros(delta * n, dtype=bool)
        frontier = (np.arange(delta, dtype=np.int64)[:, None] * n + seeds[None, :]).ravel()
        visited[frontier] = True
        indptr, targets = self.indptr, self.targets
        while frontier.size:
            starts = indptr[frontier]
            counts = indptr[frontier + 1] - starts
            has = counts > 0
            if not has.any():
                break
            starts, counts = starts[has], counts[has]
            offsets = np.cumsum(counts) - counts
            idx = np.repeat(starts - offsets, counts) + np.arange(int(counts.sum()))
            nxt = targets[idx]
            nxt = np.unique(nxt[~visited[nxt]])
            visited[nxt] = True
            frontier = nxt
        return visited.reshape(delta, n)

    def activation_counts(self, seeds) -> np.ndarray:
        """Per node, the number of samples in which it ends up active."""
        return self.reached(seeds).sum(axis=0)


@dataclass(frozen=True)
class InfluenceEstimate:
    total: float
    per_group: np.ndarray
    total_sem: float = 0.0


def sample_ensemble(graph: AttributedGraph, p: float, sample_count: int = DEFAULT_SAMPLES,
                    rng_seed: int = 0) -> LiveEdgeEnsemble:
    """Keep each of the ``2|E|`` directed arcs independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"propagation probability {p} outside [0, 1]")
    if sample_count < 1:
        raise ValidationError("sample_count must be >= 1")
    n = graph.n
    e = graph.edges
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    n_arcs = src.size
    rng = np.random.default_rng(rng_seed)
    samples, arcs = [], []
    if n_arcs:
        rows = max(1, _DRAW_CHUNK // n_arcs)
        for lo in range(0, sample_count, rows):
            c = min(rows, sample_count - lo)
            s_idx, a_idx = np.nonzero(rng.random((c, n_arcs)) < p)
            samples.append(s_idx + lo)
            arcs.append(a_idx)
    s_all = np.concatenate(samples) if samples else np.zeros(0, dtype=np.int64)
    a_all = np.concatenate(arcs) if arcs else np.zeros(0, dtype=np.int64)
    a_src, a_dst = src[a_all], dst[a_all]
    order = np.lexsort((a_dst, a_src, s_all))
    s_all, a_src, a_dst = s_all[order], a_src[order], a_dst[order]
    gsrc = s_all * n + a_src
    indptr = np.zeros(sample_count * n + 1, dtype=np.int64)
    np.cumsum(np.bincount(gsrc, minlength=sample_count * n), out=indptr[1:])
    arrays = [s_all, a_src, a_dst, indptr, s_all * n + a_dst]
    for a in arrays:
        a.flags.writeable = False
    return LiveEdgeEnsemble(n, float(p), int(sample_count), int(rng_seed), *arrays)


def _check_seeds(n: int, seeds) -> np.ndarray:
    seeds = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if seeds.size == 0:
        raise ContractViolation("seed set must be nonempty")
    if seeds[0] < 0 or seeds[-1] >= n:
        raise ContractViolation("seed outside the graph")
    return seeds


def estimate_influence(ensemble: LiveEdgeEnsemble, graph: AttributedGraph, seeds) -> InfluenceEstimate:
    """Mean reachable-set size of ``seeds`` over the ensemble, overall and per group."""
    if ensemble.n != graph.n:
        raise ContractViolation("ensemble was sampled from a different graph")
    seeds = _check_seeds(graph.n, seeds)
    hits = ensemble.reached(seeds)
    per_sample = hits.sum(axis=1)
    node_hits = hits.sum(axis=0)
    delta = ensemble.sample_count
    per_group = node_hits @ graph.membership() / delta if graph.group_count else np.zeros(0)
    sem = float(per_sample.std(ddof=1) / np.sqrt(delta)) if delta > 1 else 0.0
    return InfluenceEstimate(float(per_sample.mean()), np.asarray(per_group, dtype=float), sem)


def direct_ic_counts(graph: AttributedGraph, seeds, p: float, rounds: int, rng_seed: int = 0) -> np.ndarray:
    """Activated-node count of ``rounds`` independent cascade simulations."""
    seeds = _check_seeds(graph.n, seeds)
    rng = np.random.default_rng(rng_seed)
    indptr, indices = graph.indptr, graph.indices
    out = np.empty(rounds, dtype=np.int64)
    for r in range(rounds):
        active = np.zeros(graph.n, dtype=bool)
        active[seeds] = True
        frontier = seeds
        while frontier.size:
            starts = indptr[frontier]
            counts = indptr[frontier + 1] - starts
            offsets = np.cumsum(counts) - counts
            idx = np.repeat(starts - offsets, counts) + np.arange(int(counts.sum()))
            nbrs = indices[idx]
            nbrs = nbrs[~active[nbrs]]
            fired = nbrs[rng.random(nbrs.size) < p]
            frontier = np.unique(fired)
            active[frontier] = True
        out[r] = active.sum()
    return out


def direct_ic_simulate(graph: AttributedGraph, seeds, p: float, rounds: int, rng_seed: int = 0) -> float:
    return float(direct_ic_counts(graph, seeds, p, rounds, rng_seed).mean())


def _celf(ensemble: LiveEdgeEnsemble, k: int):
    n = ensemble.n
    if not 1 <= k <= n:
        raise ContractViolation(f"k={k} outside 1..{n}")
    # integer activation totals keep lazy and naive greedy bit-identical
    heap = [(-int(ensemble.activation_counts([v]).sum()), v, 0) for v in range(n)]
    heapq.heapify(heap)
    chosen: list = []
    current = 0
    curve = []
    while len(chosen) < k:
        neg_gain, v, stamp = heapq.heappop(heap)
        if stamp == len(chosen):
            chosen.append(v)
            current -= neg_gain
            curve.append(current / ensemble.sample_count)
            continue
        gain = int(ensemble.activation_counts(chosen + [v]).sum()) - current
        heapq.heappush(heap, (-gain, v, len(chosen)))
    return np.array(chosen, dtype=np.int64), np.array(curve)


def greedy_naive(ensemble: LiveEdgeEnsemble, k: int):
    """Plain greedy without lazy evaluation; reference for :func:`greedy_celf`."""
    n = ensemble.n
    if not 1 <= k <= n:
        raise ContractViolation(f"k={k} outside 1..{n}")
    chosen: list = []
    curve = []
    for _ in range(k):
        best, best_total = -1, -1
        for v in range(n):
            if v in chosen:
                continue
            total = int(ensemble.activation_counts(chosen + [v]).sum())
            if total > best_total:
                best, best_total = v, total
        chosen.append(best)
        curve.append(best_total / ensemble.sample_count)
    return np.array(chosen, dtype=np.int64), np.array(curve)


def group_ensemble(graph: AttributedGraph, group: int, p: float, sample_count: int, rng_seed: int):
    """Return ``(subgraph, old_ids, ensemble)`` for the subgraph induced by one group."""
    sub, old_ids = induced_subgraph(graph, graph.groups[group])
    ens = sample_ensemble(sub, p, sample_count, derive_seed(rng_seed, GROUP_ENSEMBLE, group))
    return sub, old_ids, ens


def greedy_celf(ensemble: LiveEdgeEnsemble, graph: AttributedGraph, k: int, restrict_group=None):
    """Lazy-greedy influence maximisation. Returns ``(seeds, influence_curve)``.

    With ``restrict_group`` set, runs inside the subgraph induced by that group on
    its own ensemble (same ``p`` and sample count, seed derived from the
    ensemble's seed and the group index); seeds come back as parent-graph ids.
    """
    if restrict_group is None:
        if ensemble.n != graph.n:
            raise ContractViolation("ensemble was sampled from a different graph")
        return _celf(ensemble, k)
    _, old_ids, ens = group_ensemble(graph, restrict_group, ensemble.p, ensemble.sample_count,
                                     ensemble.rng_seed)
    seeds, curve = _celf(ens, k)
    return old_ids[seeds], curve


def group_seed_budgets(graph: AttributedGraph, k: int) -> np.ndarray:
    """``ceil(k * |R_i| / n)`` per group, in exact integer arithmetic."""
    return np.array([-(-k * int(s) // graph.n) for s in graph.group_sizes], dtype=np.int64)


_BASELINE_CACHE: dict = {}


def group_baselines(graph: AttributedGraph, k: int, p: float, sample_count: int = DEFAULT_SAMPLES,
                    rng_seed: int = 0) -> np.ndarray:
    """Greedy influence each group reaches inside its own subgraph with its fair seed share.

    These are the denominators of the diversity-constraint violation. Results are
    memoised per ``(graph, k, p, sample_count, rng_seed)``.
    """
    key = (graph.fingerprint(), int(k), float(p), int(sample_count), int(rng_seed))
    if key not in _BASELINE_CACHE:
        out = []
        for i, k_i in enumerate(group_seed_budgets(graph, k)):
            _, _, ens = group_ensemble(graph, i, p, sample_count, rng_seed)
            _, curve = _celf(ens, int(k_i))
            out.append(curve[-1])
        result = np.array(out, dtype=float)
        result.flags.writeable = False
        _BASELINE_CACHE[key] = result
    return _BASELINE_CACHE[key]
