"""Experiment harness: repeated algorithm comparisons and lambda sweeps with CSV/JSON output."""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .community import louvain, modularity
from .diffusion import (DEFAULT_SAMPLES, estimate_influence, greedy_celf, group_baselines,
                        group_seed_budgets, sample_ensemble)
from .errors import ValidationError
from .evolution import COMMUNITY, RANDOM, TRACE_HEADER, EvolutionConfig, evolve
from .fairness import fairness_report
from .graph import (AttributedGraph, SbmSpec, generate_sbm, karate_club, load_edge_list,
                    load_groups, write_edge_list, write_groups)
from .seeding import EVOLUTION, LOUVAIN, OPT_ENSEMBLE, REPORT_ENSEMBLE, derive_seed
from .selection import pagerank

log = logging.getLogger(__name__)

ALGORITHMS = ("cea-fim", "rea-fim", "greedy")
RUNS_HEADER = ("algorithm", "repetition", "seed", "k", "mf", "dcv", "f", "influence", "pof")
SUMMARY_HEADER = ("algorithm", "runs", "mean_mf", "mean_dcv", "mean_f", "mean_influence", "mean_pof",
                  "std_mf", "std_dcv", "std_f")
TIMINGS_HEADER = ("algorithm", "repetition", "algorithm_seconds", "setup_seconds", "seconds")
SWEEP_HEADER = ("lambda", "runs", "mean_dcv", "mean_mf", "mean_pof", "mean_f",
                "rank_dcv", "rank_mf", "rank_pof")
RANK_DECIMALS = 2
_METRICS = ("mf", "dcv", "f", "influence", "pof")


@dataclass(frozen=True)
class ExperimentConfig:
    network: dict
    algorithms: tuple = ALGORITHMS
    k: int = 40
    pop: int = 10
    g_max: int = 150
    cr: float = 0.6
    mu: float = 0.1
    lam: float = 0.5
    p: float = 0.01
    delta: int = DEFAULT_SAMPLES
    lambdas: tuple = (0.5,)
    repetitions: int = 10
    seed: int = 0
    out: str = "results"
    split_timings: bool = False

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "lambdas", tuple(float(x) for x in self.lambdas))
        problems = []
        if not self.algorithms:
            problems.append("algorithms: at least one required")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            problems.append(f"algorithms: unknown {bad}")
        if self.repetitions < 1:
            problems.append("repetitions: must be >= 1")
        if not self.lambdas:
            problems.append("lambdas: must be nonempty")
        if any(not 0.0 <= x <= 1.0 for x in self.lambdas):
            problems.append("lambdas: entries must lie in [0, 1]")
        if not 0.0 <= self.p <= 1.0:
            problems.append("p: must lie in [0, 1]")
        if self.delta < 1:
            problems.append("delta: must be >= 1")
        if self.seed < 0:
            problems.append("seed: must be >= 0")
        if not isinstance(self.network, dict) or self.network.get("type") not in ("sbm", "files", "karate"):
            problems.append("network: type must be one of sbm, files, karate")
        if problems:
            raise ValidationError("invalid config: " + "; ".join(problems))
        self.evolution_config()  # validates the evolution fields

    def evolution_config(self, lam: Optional[float] = None, mode: str = COMMUNITY,
                         rng_seed: int = 0) -> EvolutionConfig:
        return EvolutionConfig(pop=self.pop, g_max=self.g_max, cr=self.cr, mu=self.mu, k=self.k,
                               lam=self.lam if lam is None else lam, selection_mode=mode,
                               rng_seed=rng_seed)

    @classmethod
    def from_dict(cls, data: dict, base_dir=None) -> "ExperimentConfig":
        data = dict(data)
        evo = data.pop("evolution", {}) or {}
        if "lambda" in evo:
            evo["lam"] = evo.pop("lambda")
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        merged = {**evo, **data}
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(merged) - known)
        if unknown:
            raise ValidationError(f"invalid config: unknown fields {unknown}")
        if "network" not in merged:
            raise ValidationError("invalid config: network is required")
        network = dict(merged["network"])
        if base_dir is not None:
            for key in ("edges", "groups", "path"):
                if key in network and not Path(network[key]).is_absolute():
                    network[key] = str(Path(base_dir) / network[key])
            if "out" in merged and not Path(merged["out"]).is_absolute():
                merged["out"] = str(Path(base_dir) / merged["out"])
        merged["network"] = network
        try:
            return cls(**merged)
        except TypeError as exc:
            raise ValidationError(f"invalid config: {exc}") from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["algorithms"] = list(self.algorithms)
        d["lambdas"] = list(self.lambdas)
        return d

    def provenance(self) -> dict:
        """Resolved parameters for result files; the output location is left out so reruns elsewhere match."""
        d = self.to_dict()
        del d["out"]
        return d

    def replace(self, **changes) -> "ExperimentConfig":
        return ExperimentConfig(**{**asdict(self), **changes})


def load_network(spec: dict) -> AttributedGraph:
    kind = spec.get("type")
    if kind == "karate":
        return karate_club()
    if kind == "sbm":
        if "path" in spec:
            return generate_sbm(SbmSpec.from_json(spec["path"]))
        return generate_sbm(SbmSpec.from_dict(spec["spec"]))
    if kind == "files":
        graph = load_edge_list(spec["edges"])
        return load_groups(graph, spec["groups"], column=int(spec.get("attribute", 0)))
    raise ValidationError(f"unknown network type {kind!r}")


@dataclass
class Workspace:
    """Per-network state computed once and shared by every repetition."""

    config: ExperimentConfig
    graph: AttributedGraph
    partition: object
    scores: object
    baselines: np.ndarray
    setup_seconds: float
    community_seconds: float


def prepare(config: ExperimentConfig) -> Workspace:
    t0 = time.perf_counter()
    graph = load_network(config.network)
    if graph.group_count == 0:
        raise ValidationError("network has no groups")
    if config.k > graph.n:
        raise ValidationError(f"k={config.k} exceeds node count {graph.n}")
    baselines = group_baselines(graph, config.k, config.p, config.delta, config.seed)
    t1 = time.perf_counter()
    partition = louvain(graph, derive_seed(config.seed, LOUVAIN))
    scores = pagerank(graph)
    t2 = time.perf_counter()
    return Workspace(config, graph, partition, scores, baselines, t1 - t0, t2 - t1)


def network_summary(ws: Workspace) -> dict:
    g = ws.graph
    return {
        "nodes": g.n,
        "edges": g.edge_count,
        "groups": [str(x) for x in g.group_labels],
        "group_sizes": [int(s) for s in g.group_sizes],
        "group_seed_budgets": [int(x) for x in group_seed_budgets(g, ws.config.k)],
        "group_baselines": [float(x) for x in ws.baselines],
        "communities": ws.partition.community_count,
        "modularity": modularity(g, ws.partition),
        "fingerprint": g.fingerprint(),
    }


def run_repetition(ws: Workspace, rep: int, lam: float, algorithms) -> dict:
    """Run every requested algorithm once on shared optimisation/reporting ensembles."""
    cfg, g = ws.config, ws.graph
    rep_seed = cfg.seed + rep
    t0 = time.perf_counter()
    opt_ens = sample_ensemble(g, cfg.p, cfg.delta, derive_seed(rep_seed, OPT_ENSEMBLE))
    report_ens = sample_ensemble(g, cfg.p, cfg.delta, derive_seed(rep_seed, REPORT_ENSEMBLE))
    setup = time.perf_counter() - t0 + ws.setup_seconds

    t0 = time.perf_counter()
    greedy_seeds, _ = greedy_celf(opt_ens, g, cfg.k)
    greedy_time = time.perf_counter() - t0
    opt_influence = estimate_influence(report_ens, g, greedy_seeds).total

    runs, traces, timings = [], {}, []
    for alg in algorithms:
        if alg == "greedy":
            seeds, elapsed = [int(v) for v in greedy_seeds], greedy_time
        else:
            mode = COMMUNITY if alg == "cea-fim" else RANDOM
            evo_cfg = cfg.evolution_config(lam, mode, derive_seed(rep_seed, EVOLUTION))
            t0 = time.perf_counter()
            result = evolve(g, ws.partition, ws.scores, opt_ens, ws.baselines, evo_cfg)
            elapsed = time.perf_counter() - t0
            if alg == "cea-fim":
                elapsed += ws.community_seconds
            seeds = sorted(int(v) for v in result.seeds)
            traces[alg] = [row.as_tuple() for row in result.trace]
        report = fairness_report(estimate_influence(report_ens, g, seeds), g.group_sizes,
                                 ws.baselines, lam, opt_influence)
        runs.append({"algorithm": alg, "repetition": rep, "seed": rep_seed, "lambda": lam,
                     "seeds": [int(g.labels[v]) for v in sorted(seeds)], **report.to_dict()})
        timings.append((alg, rep, elapsed, setup, elapsed if cfg.split_timings else elapsed + setup))
    return {"runs": runs, "traces": traces, "timings": timings}


_WORKER_WS: Optional[Workspace] = None


def _init_worker(config: ExperimentConfig) -> None:
    global _WORKER_WS
    _WORKER_WS = prepare(config)


def _worker(args):
    rep, lam, algorithms = args
    return run_repetition(_WORKER_WS, rep, lam, algorithms)


def thread_cap() -> int:
    raw = os.environ.get("FIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValidationError(f"FIM_THREADS must be an integer, got {raw!r}") from None


def _execute(ws: Workspace, tasks: list) -> list:
    workers = min(thread_cap(), len(tasks))
    if workers <= 1:
        return [run_repetition(ws, *t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(ws.config,)) as pool:
        return list(pool.map(_worker, tasks))


def aggregate(runs: list, key: str = "algorithm") -> dict:
    out: dict = {}
    for value in dict.fromkeys(r[key] for r in runs):
        rows = [r for r in runs if r[key] == value]
        entry = {"runs": len(rows)}
        for m in _METRICS:
            vals = np.array([r[m] for r in rows], dtype=float)
            entry[f"mean_{m}"] = float(vals.mean())
            entry[f"std_{m}"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        out[value] = entry
    return out


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_experiment(config: ExperimentConfig) -> dict:
    """Compare the configured algorithms over ``repetitions`` runs; writes results under ``config.out``."""
    out = Path(config.out)
    ws = prepare(config)
    log.info("network: %d nodes, %d edges, %d communities", ws.graph.n, ws.graph.edge_count,
             ws.partition.community_count)
    tasks = [(rep, config.lam, config.algorithms) for rep in range(config.repetitions)]
    results = _execute(ws, tasks)
    runs = [r for res in results for r in res["runs"]]
    payload = {"config": config.provenance(), "network": network_summary(ws), "runs": runs,
               "aggregate": aggregate(runs)}

    out.mkdir(parents=True, exist_ok=True)
    (out / "traces").mkdir(exist_ok=True)
    _write_json(out / "results.json", payload)
    _write_csv(out / "runs.csv", RUNS_HEADER,
               [[r["algorithm"], r["repetition"], r["seed"], config.k] + [r[m] for m in _METRICS]
                for r in runs])
    _write_csv(out / "summary.csv", SUMMARY_HEADER,
               [[alg, a["runs"], a["mean_mf"], a["mean_dcv"], a["mean_f"], a["mean_influence"],
                 a["mean_pof"], a["std_mf"], a["std_dcv"], a["std_f"]]
                for alg, a in payload["aggregate"].items()])
    _write_csv(out / "timings.csv", TIMINGS_HEADER, [t for res in results for t in res["timings"]])
    for rep, res in enumerate(results):
        for alg, rows in res["traces"].items():
            _write_csv(out / "traces" / f"{alg}_rep{rep}.csv", TRACE_HEADER, rows)
    payload["traces"] = [res["traces"] for res in results]
    return payload


def dense_ranks(values, ascending: bool = True) -> list:
    """Rank 1 for the best value; equal values (after rounding) share a rank."""
    rounded = [round(v, RANK_DECIMALS) for v in values]
    distinct = sorted(set(rounded), reverse=not ascending)
    return [distinct.index(v) + 1 for v in rounded]


def sweep_lambda(config: ExperimentConfig) -> dict:
    """Run CEA-FIM for every weight in ``config.lambdas``; one aggregate row per weight."""
    out = Path(config.out)
    ws = prepare(config)
    tasks = [(rep, lam, ("cea-fim",)) for lam in config.lambdas for rep in range(config.repetitions)]
    results = _execute(ws, tasks)
    runs = [r for res in results for r in res["runs"]]
    agg = aggregate(runs, key="lambda")
    lams = list(agg)
    rank_dcv = dense_ranks([agg[x]["mean_dcv"] for x in lams], ascending=True)
    rank_mf = dense_ranks([agg[x]["mean_mf"] for x in lams], ascending=False)
    rank_pof = dense_ranks([agg[x]["mean_pof"] for x in lams], ascending=True)
    rows = [[lam, agg[lam]["runs"], agg[lam]["mean_dcv"], agg[lam]["mean_mf"], agg[lam]["mean_pof"],
             agg[lam]["mean_f"], rank_dcv[i], rank_mf[i], rank_pof[i]] for i, lam in enumerate(lams)]
    payload = {"config": config.provenance(), "network": network_summary(ws), "runs": runs,
               "aggregate": {str(lam): agg[lam] for lam in lams}}
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "sweep.json", payload)
    _write_csv(out / "sweep.csv", SWEEP_HEADER, rows)
    payload["rows"] = rows
    return payload


def generate_files(spec_path, prefix) -> tuple:
    """Materialise an SBM spec as ``<prefix>.edges`` and ``<prefix>.groups``."""
    graph = generate_sbm(SbmSpec.from_json(spec_path))
    prefix = str(prefix)
    edges, groups = Path(prefix + ".edges"), Path(prefix + ".groups")
    write_edge_list(graph, edges)
    write_groups(graph, groups)
    return edges, groups
