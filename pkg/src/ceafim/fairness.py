"""Group fairness metrics and the scalar fitness used by the evolutionary search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diffusion import InfluenceEstimate
from .errors import ContractViolation

__all__ = [
    "FairnessReport",
    "maximin_fairness",
    "diversity_constraint_violation",
    "group_violations",
    "evaluate_fitness",
    "price_of_fairness",
    "fairness_report",
]

DEFAULT_LAMBDA = 0.5


def maximin_fairness(estimate: InfluenceEstimate, group_sizes) -> float:
    """Smallest fraction of any group that the seed set is expected to reach."""
    return float(np.min(np.asarray(estimate.per_group, dtype=float) / np.asarray(group_sizes, dtype=float)))


def group_violations(estimate: InfluenceEstimate, baselines) -> np.ndarray:
    baselines = np.asarray(baselines, dtype=float)
    if np.any(baselines <= 0):
        raise ContractViolation("group baselines must be positive")
    shortfall = (baselines - np.asarray(estimate.per_group, dtype=float)) / baselines
    return np.maximum(shortfall, 0.0)


def diversity_constraint_violation(estimate: InfluenceEstimate, baselines) -> float:
    """Mean relative shortfall of each group against its own-subgraph greedy baseline."""
    return float(np.mean(group_violations(estimate, baselines)))


def evaluate_fitness(mf: float, dcv: float, lam: float = DEFAULT_LAMBDA) -> float:
    if not 0.0 <= lam <= 1.0:
        raise ContractViolation(f"lambda {lam} outside [0, 1]")
    return lam * mf - (1.0 - lam) * dcv


def price_of_fairness(opt_influence: float, fair_influence: float) -> float:
    if fair_influence <= 0:
        raise ContractViolation("fair influence must be positive")
    return opt_influence / fair_influence


@dataclass(frozen=True)
class FairnessReport:
    mf: float
    dcv: float
    f_value: float
    influence: float
    per_group_fraction: tuple
    per_group_violation: tuple
    pof: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "mf": self.mf,
            "dcv": self.dcv,
            "f": self.f_value,
            "influence": self.influence,
            "pof": self.pof,
            "per_group_fraction": list(self.per_group_fraction),
            "per_group_violation": list(self.per_group_violation),
        }


def fairness_report(estimate: InfluenceEstimate, group_sizes, baselines,
                    lam: float = DEFAULT_LAMBDA, opt_influence: Optional[float] = None) -> FairnessReport:
    fractions = np.asarray(estimate.per_group, dtype=float) / np.asarray(group_sizes, dtype=float)
    violations = group_violations(estimate, baselines)
    mf = float(fractions.min())
    dcv = float(violations.mean())
    pof = None if opt_influence is None else price_of_fairness(opt_influence, estimate.total)
    return FairnessReport(mf, dcv, evaluate_fitness(mf, dcv, lam), estimate.total,
                          tuple(float(x) for x in fractions), tuple(float(x) for x in violations), pof)
