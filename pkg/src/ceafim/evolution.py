"""Evolutionary search for fair seed sets, with community-guided or uniform operators."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .community import Partition
from .diffusion import LiveEdgeEnsemble, estimate_influence
from .errors import InvariantError, ValidationError
from .fairness import DEFAULT_LAMBDA, FairnessReport, fairness_report
from .graph import AttributedGraph
from .seeding import substream
from .selection import (NodeScores, SelectionContext, SelectionState, select_community,
                        select_fair_node)

__all__ = [
    "EvolutionConfig",
    "Individual",
    "TraceRow",
    "EvolutionResult",
    "FitnessEvaluator",
    "CommunitySampler",
    "RandomSampler",
    "initialize_population",
    "crossover",
    "mutation",
    "evolve",
    "rea_fim_variant",
    "TRACE_HEADER",
]

COMMUNITY = "community"
RANDOM = "random"

# substream tags
_INIT, _SWAP, _REPAIR, _MUTATE = 0, 1, 2, 3

TRACE_HEADER = ("generation", "best_f", "mean_f", "best_mf", "best_dcv")


@dataclass(frozen=True)
class EvolutionConfig:
    pop: int = 10
    g_max: int = 150
    cr: float = 0.6
    mu: float = 0.1
    k: int = 40
    lam: float = DEFAULT_LAMBDA
    selection_mode: str = COMMUNITY
    rng_seed: int = 0

    def __post_init__(self):
        problems = []
        if self.pop < 2 or self.pop % 2:
            problems.append(f"pop must be even and >= 2 (got {self.pop})")
        if self.g_max < 0:
            problems.append("g_max must be >= 0")
        for name in ("cr", "mu", "lam"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                problems.append(f"{name} must lie in [0, 1]")
        if self.k < 1:
            problems.append("k must be >= 1")
        if self.selection_mode not in (COMMUNITY, RANDOM):
            problems.append(f"selection_mode must be {COMMUNITY!r} or {RANDOM!r}")
        if self.rng_seed < 0:
            problems.append("rng_seed must be >= 0")
        if problems:
            raise ValidationError("; ".join(problems))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Individual:
    genes: tuple
    report: Optional[FairnessReport] = None
    evaluated_on: Optional[tuple] = None

    @property
    def fitness(self) -> float:
        return self.report.f_value


@dataclass(frozen=True)
class TraceRow:
    generation: int
    best_f: float
    mean_f: float
    best_mf: float
    best_dcv: float

    def as_tuple(self) -> tuple:
        return (self.generation, self.best_f, self.mean_f, self.best_mf, self.best_dcv)


@dataclass
class EvolutionResult:
    best: Individual
    trace: list
    population: list = field(repr=False, default_factory=list)

    @property
    def seeds(self) -> tuple:
        return self.best.genes


class FitnessEvaluator:
    """Scores seed sets on one fixed ensemble, memoised by gene set."""

    def __init__(self, graph: AttributedGraph, ensemble: LiveEdgeEnsemble, baselines,
                 lam: float = DEFAULT_LAMBDA):
        self.graph = graph
        self.ensemble = ensemble
        self.baselines = np.asarray(baselines, dtype=float)
        self.lam = lam
        self.group_sizes = graph.group_sizes
        self.key = (ensemble.rng_seed, ensemble.p, ensemble.sample_count, ensemble.arc_count)
        self._cache: dict = {}

    def report(self, genes) -> FairnessReport:
        key = frozenset(int(g) for g in genes)
        hit = self._cache.get(key)
        if hit is None:
            est = estimate_influence(self.ensemble, self.graph, sorted(key))
            hit = fairness_report(est, self.group_sizes, self.baselines, self.lam)
            self._cache[key] = hit
        return hit

    def evaluate(self, ind: Individual) -> Individual:
        if ind.report is None or ind.evaluated_on != self.key:
            ind.report = self.report(ind.genes)
            ind.evaluated_on = self.key
        return ind


class CommunitySampler:
    """Node choices through the community-then-node strategy."""

    def __init__(self, context: SelectionContext):
        self.context = context
        self.scores = context.scores

    def genes_from_counts(self, counts) -> list:
        """Top-``counts[h]`` nodes by score from every community ``h``, community order."""
        genes: list = []
        for h, c in enumerate(counts):
            if c:
                genes.extend(int(v) for v in self.scores.top(self.context.members[h], int(c)))
        return genes

    def initial(self, k: int, rng) -> list:
        ctx = self.context
        state = SelectionState(ctx)
        counts = np.zeros(ctx.community_count, dtype=np.int64)
        for _ in range(k):
            t = select_community(state, rng, counts < ctx.sizes)
            counts[t] += 1
        return self.genes_from_counts(counts)

    def refill(self, genes: list, k: int, rng) -> list:
        state = SelectionState(self.context, genes)
        genes = list(genes)
        while len(genes) < k:
            genes.append(select_fair_node(state, self.scores, rng, exclude=genes))
        return genes

    def replace(self, genes: list, j: int, rng) -> int:
        others = genes[:j] + genes[j + 1:]
        state = SelectionState(self.context, others)
        return select_fair_node(state, self.scores, rng, exclude=others)


class RandomSampler:
    """Uniform choices over non-excluded nodes."""

    def __init__(self, n: int):
        self.n = n

    def _uniform(self, exclude, rng) -> int:
        pool = np.setdiff1d(np.arange(self.n), np.asarray(list(exclude), dtype=np.int64))
        return int(pool[rng.integers(pool.size)])

    def initial(self, k: int, rng) -> list:
        return [int(v) for v in rng.choice(self.n, size=k, replace=False)]

    def refill(self, genes: list, k: int, rng) -> list:
        genes = list(genes)
        while len(genes) < k:
            genes.append(self._uniform(genes, rng))
        return genes

    def replace(self, genes: list, j: int, rng) -> int:
        return self._uniform(genes[:j] + genes[j + 1:], rng)


def _check(population, k: int, n: int) -> None:
    for ind in population:
        g = ind.genes
        if len(g) != k or len(set(g)) != k or min(g) < 0 or max(g) >= n:
            raise InvariantError(f"invalid individual {g}")


def initialize_population(sampler, config: EvolutionConfig) -> list:
    return [Individual(tuple(sampler.initial(config.k, substream(config.rng_seed, _INIT, i))))
            for i in range(config.pop)]


def crossover(population: list, config: EvolutionConfig, sampler, generation: int = 0) -> list:
    """Uniform crossover of rank ``i`` with rank ``pop - 1 - i``, then duplicate repair.

    ``population`` must already be sorted best first.
    """
    pop = len(population)
    children = [list(ind.genes) for ind in population]
    for i in range(pop // 2):
        a, b = children[i], children[pop - 1 - i]
        rng = substream(config.rng_seed, _SWAP, generation, i)
        for j in range(config.k):
            if rng.random() < config.cr:
                a[j], b[j] = b[j], a[j]
    out = []
    for i, genes in enumerate(children):
        genes = list(dict.fromkeys(genes))
        if len(genes) < config.k:
            genes = sampler.refill(genes, config.k, substream(config.rng_seed, _REPAIR, generation, i))
        out.append(Individual(tuple(genes)))
    return out


def mutation(population: list, config: EvolutionConfig, sampler, generation: int = 0) -> list:
    out = []
    for i, ind in enumerate(population):
        genes = list(ind.genes)
        rng = substream(config.rng_seed, _MUTATE, generation, i)
        changed = False
        for j in range(config.k):
            if rng.random() < config.mu:
                v = sampler.replace(genes, j, rng)
                changed = changed or v != genes[j]
                genes[j] = v
        out.append(ind if not changed else Individual(tuple(genes)))
    return out


def _trace_row(generation: int, population: list) -> TraceRow:
    best = max(population, key=lambda ind: ind.fitness)
    mean_f = float(np.mean([ind.fitness for ind in population]))
    return TraceRow(generation, best.fitness, mean_f, best.report.mf, best.report.dcv)


def _make_sampler(graph, partition, scores, config):
    if config.selection_mode == RANDOM:
        return RandomSampler(graph.n)
    return CommunitySampler(SelectionContext(graph, partition, scores))


def evolve(graph: AttributedGraph, partition: Partition, scores: NodeScores,
           ensemble: LiveEdgeEnsemble, baselines, config: EvolutionConfig,
           evaluator: Optional[FitnessEvaluator] = None) -> EvolutionResult:
    """Run ``g_max`` generations of sort, crossover, mutation and one-to-one elitist survival.

    Fitness is computed on the single ``ensemble`` throughout, so an individual's
    score never changes between generations and the best score cannot drop.
    """
    if config.k > graph.n:
        raise ValidationError(f"k={config.k} exceeds node count {graph.n}")
    sampler = _make_sampler(graph, partition, scores, config)
    if evaluator is None:
        evaluator = FitnessEvaluator(graph, ensemble, baselines, config.lam)
    population = [evaluator.evaluate(ind) for ind in initialize_population(sampler, config)]
    _check(population, config.k, graph.n)
    trace = [_trace_row(0, population)]
    for g in range(1, config.g_max + 1):
        # stable sort keeps index order among equal fitness
        population = sorted(population, key=lambda ind: -ind.fitness)
        offspring = mutation(crossover(population, config, sampler, g), config, sampler, g)
        _check(offspring, config.k, graph.n)
        for i, child in enumerate(offspring):
            evaluator.evaluate(child)
            if child.fitness > population[i].fitness:
                population[i] = child
        trace.append(_trace_row(g, population))
    best = max(population, key=lambda ind: ind.fitness)
    return EvolutionResult(best, trace, population)


def rea_fim_variant(graph: AttributedGraph, partition: Partition, scores: NodeScores,
                    ensemble: LiveEdgeEnsemble, baselines, config: EvolutionConfig,
                    evaluator: Optional[FitnessEvaluator] = None) -> EvolutionResult:
    """The same search with every node choice made uniformly at random."""
    cfg = EvolutionConfig(**{**config.to_dict(), "selection_mode": RANDOM})
    return evolve(graph, partition, scores, ensemble, baselines, cfg, evaluator)
