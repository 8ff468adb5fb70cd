import numpy as np
import pytest
from hypothesis import given, strategies as st

from ceafim.diffusion import InfluenceEstimate, estimate_influence, group_baselines, sample_ensemble
from ceafim.errors import ContractViolation
from ceafim.fairness import (diversity_constraint_violation, evaluate_fitness, fairness_report,
                             maximin_fairness, price_of_fairness)
from ceafim.graph import AttributedGraph

from .conftest import random_graph


def est(per_group, total=None):
    per_group = np.asarray(per_group, dtype=float)
    return InfluenceEstimate(float(per_group.sum()) if total is None else total, per_group)


def test_mf_single_group_is_total_fraction():
    assert maximin_fairness(est([30]), [120]) == 0.25


def test_mf_arithmetic():
    assert maximin_fairness(est([10, 5]), [100, 20]) == pytest.approx(0.10, abs=1e-12)


def test_mf_all_seeded():
    rng = np.random.default_rng(0)
    g = random_graph(15, 0.2, rng, q=3)
    e = estimate_influence(sample_ensemble(g, 0.1, 20, 0), g, range(g.n))
    assert maximin_fairness(e, g.group_sizes) == 1.0


def test_dcv_all_met():
    assert diversity_constraint_violation(est([12, 9]), [10, 8]) == 0.0


def test_dcv_arithmetic():
    assert diversity_constraint_violation(est([5, 8]), [10, 8]) == pytest.approx(0.25, abs=1e-12)


def test_dcv_nonpositive_baseline():
    with pytest.raises(ContractViolation):
        diversity_constraint_violation(est([1, 1]), [0, 2])


def test_six_node_no_diffusion():
    # R0 = {0,1,2,3}, R1 = {4,5}; k = 2 gives budgets ceil(8/6) = 2, ceil(4/6) = 1.
    # With p = 0 seeds reach only themselves, so baselines are 2 and 1.
    g = AttributedGraph.from_edges(6, [(0, 1), (1, 4), (2, 3), (4, 5)], [[0, 1, 2, 3], [4, 5]])
    base = group_baselines(g, 2, 0.0, 10, 0)
    assert list(base) == [2.0, 1.0]
    ens = sample_ensemble(g, 0.0, 10, 0)
    r = fairness_report(estimate_influence(ens, g, [0, 1]), g.group_sizes, base, 0.5)
    # achieved (2, 0): violations (0, 1)
    assert r.per_group_violation == (0.0, 1.0)
    assert abs(r.dcv - 0.5) < 1e-12 and abs(r.mf - 0.0) < 1e-12 and abs(r.f_value + 0.25) < 1e-12
    r = fairness_report(estimate_influence(ens, g, [0, 4]), g.group_sizes, base, 0.5)
    # achieved (1, 1): violations ((2-1)/2, 0); fractions (1/4, 1/2)
    assert abs(r.dcv - 0.25) < 1e-12 and abs(r.mf - 0.25) < 1e-12 and abs(r.f_value - 0.0) < 1e-12


def test_eight_node_full_diffusion():
    # A = path 0-1-2-3, B = {4,5,6,7} with edges 4-5, 6-7, bridge 3-4. k = 2 -> budgets (1, 1).
    # Baselines at p = 1: 4 inside the path, 2 inside B.
    g = AttributedGraph.from_edges(8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (6, 7)],
                                   [[0, 1, 2, 3], [4, 5, 6, 7]])
    base = group_baselines(g, 2, 1.0, 5, 0)
    assert list(base) == [4.0, 2.0]
    ens = sample_ensemble(g, 1.0, 5, 0)
    r = fairness_report(estimate_influence(ens, g, [0]), g.group_sizes, base, 0.5)
    assert abs(r.mf - 0.5) < 1e-12 and abs(r.dcv) < 1e-12 and abs(r.f_value - 0.25) < 1e-12
    r = fairness_report(estimate_influence(ens, g, [6]), g.group_sizes, base, 0.5)
    assert abs(r.mf) < 1e-12 and abs(r.dcv - 0.5) < 1e-12 and abs(r.f_value + 0.25) < 1e-12
    r = fairness_report(estimate_influence(ens, g, [6]), g.group_sizes, base, 0.8)
    assert abs(r.f_value - (0.8 * 0.0 - 0.2 * 0.5)) < 1e-12


def test_fitness_values():
    assert evaluate_fitness(0.2, 0.1, 0.5) == pytest.approx(0.05, abs=1e-15)
    assert evaluate_fitness(0.37, 0.9, 1.0) == 0.37
    assert evaluate_fitness(0.37, 0.9, 0.0) == -0.9
    with pytest.raises(ContractViolation):
        evaluate_fitness(0.1, 0.1, 1.5)


@given(m=st.floats(0, 1), d=st.floats(0, 1), a=st.floats(0, 4), lam=st.floats(0, 1))
def test_fitness_affine(m, d, a, lam):
    base = evaluate_fitness(0.0, d, lam)
    assert evaluate_fitness(a * m, d, lam) - base == pytest.approx(a * (evaluate_fitness(m, d, lam) - base),
                                                                    abs=1e-12)


def test_pof():
    assert price_of_fairness(50.0, 50.0) == 1.0
    assert price_of_fairness(100.0, 80.0) == 1.25
    with pytest.raises(ContractViolation):
        price_of_fairness(10.0, 0.0)


def test_report_invariants():
    rng = np.random.default_rng(4)
    g = random_graph(30, 0.15, rng, q=3)
    base = group_baselines(g, 4, 0.2, 30, 1)
    ens = sample_ensemble(g, 0.2, 30, 2)
    e = estimate_influence(ens, g, [0, 5, 9])
    r = fairness_report(e, g.group_sizes, base, 0.5, opt_influence=e.total * 1.1)
    assert r.mf == min(r.per_group_fraction)
    assert r.dcv == pytest.approx(np.mean(r.per_group_violation))
    assert all(0 <= v <= 1 for v in r.per_group_violation)
    assert r.pof == pytest.approx(1.1)
    assert set(r.to_dict()) == {"mf", "dcv", "f", "influence", "pof", "per_group_fraction",
                                "per_group_violation"}


def test_mf_grows_and_dcv_zero_when_baselines_met():
    rng = np.random.default_rng(8)
    g = random_graph(25, 0.2, rng)
    ens = sample_ensemble(g, 0.2, 40, 3)
    a = estimate_influence(ens, g, [1, 2])
    b = estimate_influence(ens, g, [1, 2, 3, 4])
    assert maximin_fairness(a, g.group_sizes) <= maximin_fairness(b, g.group_sizes)
    assert diversity_constraint_violation(b, b.per_group) == 0.0
