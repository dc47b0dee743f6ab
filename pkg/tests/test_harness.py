import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gromarket.engine import path_rng, simulate
from gromarket.harness import (constant_payoff_wealth, discount_reduction_check, dominance_test,
                               exact_drift, exact_relative_drift, expected_log_growth, gibbs_gap,
                               growth_rate_compare, log_drift_from_f, random_market,
                               random_process, shifted_opponent_market, submartingale_audit,
                               survival_test, theorem4_audit, three_investor_counterexample)
from gromarket.payoff import ConfigError, DiscreteDistribution, PayoffProcess
from gromarket.strategies import ConstantRule, GRORule, ScheduleRule
from gromarket.suites import drift_markets, drift_suite, gibbs_gap_batch, random_gibbs_pairs
from gromarket.zeta import gro_proportions

TWO_ATOM = DiscreteDistribution.from_atoms([([0.5], 0.5), ([2.0], 0.5)])


def gibbs_by_hand(a, b):
    lhs = sum(x * math.log(x / y) for x, y in zip(a, b) if x > 0)
    return lhs - (sum((x - y) ** 2 for x, y in zip(a, b)) / 4 + sum(a) - sum(b))


def test_gibbs_gap_examples():
    assert gibbs_gap([0.3, 0.7], [0.3, 0.7]) == 0.0
    assert gibbs_gap([0.5, 0.5], [0.25, 0.75]) == pytest.approx(
        gibbs_by_hand([0.5, 0.5], [0.25, 0.75]), abs=1e-15)
    assert gibbs_gap([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.112591, abs=1e-6)
    assert gibbs_gap([0.2, 0.0], [0.5, 0.0]) == pytest.approx(0.2 * math.log(0.4) - 0.09 / 4 + 0.3,
                                                             abs=1e-15)
    assert gibbs_gap([0.2, 0.0], [0.5, 0.0]) == pytest.approx(0.09425, abs=1e-5)


def test_gibbs_gap_domain():
    for a, b in (([0.5], [0.0]), ([-0.1], [0.5]), ([0.8, 0.8], [0.5, 0.5]), ([0.5], [0.5, 0.5])):
        with pytest.raises(ValueError):
            gibbs_gap(a, b)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(
    st.lists(st.floats(0, 1), min_size=n, max_size=n),
    st.lists(st.floats(0, 1), min_size=n, max_size=n))))
def test_gibbs_gap_nonnegative(pair):
    a, b = (np.array(v) for v in pair)
    a /= max(1.0, a.sum())
    b /= max(1.0, b.sum())
    a[b == 0] = 0.0
    assert gibbs_gap(a, b) >= -1e-12


def test_gibbs_batch_matches_scalar():
    a, b = random_gibbs_pairs(np.random.default_rng(0), 500, 3)
    g = gibbs_gap_batch(a, b)
    for i in range(0, 500, 7):
        assert g[i] == pytest.approx(gibbs_gap(a[i], b[i]), rel=1e-9, abs=1e-12)


def test_exact_drift_all_gro_is_zero():
    rng = np.random.default_rng(1)
    for _ in range(20):
        proc = random_process(rng, 3, 4, 2)
        y = rng.uniform(0.5, 2, 3)
        for s in proc.states:
            lam = gro_proportions(y.sum(), proc.rate(s), proc.law(s, y.sum()))
            profile = np.vstack([lam] * 3)
            for m in range(3):
                row = exact_drift(proc, s, y, profile, m)
                assert abs(row.drift) <= 1e-12 and row.lower_bound <= 1e-30


def test_exact_drift_two_investor_example():
    proc = PayoffProcess.iid(DiscreteDistribution.point_mass([2.0]), 1.0)
    profile = [[0.4], [0.9]]
    row = exact_drift(proc, "s", [2.5, 2.5], profile, 0)
    assert row.lower_bound == pytest.approx(0.015625, abs=1e-15)
    assert row.drift >= 0.015625 - 1e-9
    # oracle: one atom, closed form
    y1 = 0.6 * 2.5 + 1.0 / 3.25 * 2.0
    y2 = 0.1 * 2.5 + 2.25 / 3.25 * 2.0
    assert row.drift == pytest.approx(math.log(y1 / (y1 + y2) / 0.5), abs=1e-14)


def test_exact_drift_identical_opponent():
    proc = PayoffProcess.iid(TWO_ATOM, 1.0)
    lam = gro_proportions(2.0, 1.0, TWO_ATOM)
    row = exact_drift(proc, "s", [0.3, 1.7], np.vstack([lam, lam]), 0)
    assert row.drift == pytest.approx(0.0, abs=1e-15)


def test_exact_drift_minus_infinity_for_wipeout():
    proc = PayoffProcess.iid(DiscreteDistribution.from_atoms([([0.0, 1.0], 0.5),
                                                              ([1.0, 1.0], 0.5)]), 1.0)
    row = exact_drift(proc, "s", [1.0, 1.0], [[1.0, 0.0], [0.0, 1.0]], 0)
    assert row.drift == -math.inf


def test_log_drift_closed_form_cross_check():
    rng = np.random.default_rng(2)
    checked = 0
    for _ in range(30):
        proc, rules, y0 = random_market(rng, 20)
        def observe(t, state, y, lam):
            nonlocal checked
            a = exact_drift(proc, state, y, lam, 0).drift
            b = log_drift_from_f(proc, state, y, lam, 0)
            if math.isfinite(a):
                assert b == pytest.approx(a, abs=1e-10)
                checked += 1
        simulate(proc, rules, y0, 20, path_rng(0), observe)
    assert checked > 100


def test_gro_drift_lower_bounded_by_integrals():
    rng = np.random.default_rng(4)
    for _ in range(20):
        proc, rules, y0 = random_market(rng, 10)
        def observe(t, state, y, lam):
            row = exact_drift(proc, state, y, lam, 0)
            lam, lt = np.array(row.proportions), np.array(row.representative)
            mix = row.r * lam + (1 - row.r) * lt
            assert row.drift >= row.ig + row.ih - 1e-9
            assert row.ig >= 0.25 * ((lam - mix) ** 2).sum() + lam.sum() - mix.sum() - 1e-12
            assert row.ig + row.ih >= row.lower_bound - 1e-9
        simulate(proc, rules, y0, 10, path_rng(0), observe)


def test_relative_wealth_drift_of_gro_nonnegative():
    rng = np.random.default_rng(5)
    for _ in range(10):
        proc, rules, y0 = random_market(rng, 30)
        def observe(t, state, y, lam):
            assert exact_relative_drift(proc, state, y, lam, 0) >= -1e-12
        simulate(proc, rules, y0, 30, path_rng(0), observe)


def test_submartingale_audit_random_constant_opponents():
    proc = PayoffProcess.iid(TWO_ATOM, 1.0)
    rng = np.random.default_rng(6)
    for k in range(10):
        rules = [GRORule(proc), ConstantRule([float(rng.uniform(0, 1))])]
        s = submartingale_audit(proc, rules, [1.0, 1.0], 200, k, 1)
        assert s.passed and not s.violations


def test_submartingale_audit_all_gro():
    proc = random_process(np.random.default_rng(7), 2, 3, 2)
    s = submartingale_audit(proc, [GRORule(proc)] * 3, [1.0, 0.5, 2.0], 100, 0, 2)
    assert s.passed and abs(s.details["min_drift"]) <= 1e-9


def test_zero_rate_reduction():
    K = DiscreteDistribution.from_atoms([([1.0, 0.0, 2.0], 0.3), ([0.5, 0.5, 0.0], 0.7)])
    proc = PayoffProcess.iid(K, 0.0)
    expected_relative = 0.3 * np.array([1, 0, 2]) / 3 + 0.7 * np.array([0.5, 0.5, 0]) / 1
    rec = simulate(proc, [GRORule(proc), ConstantRule([0.2, 0.2, 0.2])], [1.0, 1.0], 50,
                   path_rng(0))
    assert np.max(np.abs(rec.profiles[:, 0, :] - expected_relative)) <= 1e-15
    s = submartingale_audit(proc, [GRORule(proc), ConstantRule([0.2, 0.2, 0.2])], [1.0, 1.0],
                            50, 0, 1)
    assert s.passed


def test_fault_injection_is_caught():
    markets = drift_markets(count=5, horizon=50, seed=2, fault=0.3)
    res = drift_suite(count=5, horizon=50, seed=2, fault=0.3, markets=markets)
    assert not res.passed and res.details["n_violations"] > 0
    assert drift_suite(count=5, horizon=50, seed=2).passed


def test_audit_needs_a_gro_investor():
    proc = PayoffProcess.iid(TWO_ATOM, 1.0)
    with pytest.raises(ConfigError):
        submartingale_audit(proc, [ConstantRule([0.5]), ConstantRule([0.1])], [1, 1], 5, 0, 1)


def test_dominance_small():
    proc, rules, y0 = shifted_opponent_market(0.2)
    s = dominance_test(proc, rules, y0, 3000, 0, 4, threshold=0.99)
    assert s.passed


def test_dominance_vacuous_for_identical_opponent():
    proc = PayoffProcess.iid(TWO_ATOM, 1.0)
    s = dominance_test(proc, [GRORule(proc), GRORule(proc)], [1.0, 3.0], 200, 0, 2,
                       threshold=0.99, min_fraction=0.0)
    for p in s.paths:
        assert p["terminal_r"][0] == pytest.approx(0.25, abs=1e-12)


def test_survival_examples():
    proc = random_process(np.random.default_rng(8), 2, 3, 1)
    s = survival_test(proc, [GRORule(proc), GRORule(proc)], [1.0, 3.0], 100, 0, 2)
    assert s.passed and s.details["min_of_min_r"] == pytest.approx(0.25, abs=1e-12)
    proc, rules, y0 = random_market(np.random.default_rng(9), 200)
    assert survival_test(proc, rules, y0, 200, 0, 3).passed


def test_expected_log_growth_tree_oracle():
    proc = PayoffProcess.iid(TWO_ATOM, 1.0)
    rules = [ScheduleRule(lambda t: [0.5]), ScheduleRule(lambda t: [0.0])]
    e = expected_log_growth(proc, rules, [1.0, 1.0], "s", 1)
    # investor 1 holds the whole asset: wealth 0.5 + x
    assert e[0] == pytest.approx(0.5 * math.log(1.0) + 0.5 * math.log(2.5), abs=1e-15)
    assert e[1] == 0.0


def test_growth_rate_compare():
    proc = PayoffProcess.iid(TWO_ATOM, 1.0)
    s = growth_rate_compare(proc, [GRORule(proc), ConstantRule([0.9])], [1.0, 1.0], 4)
    assert s.passed and s.worst_margin > 0
    s = growth_rate_compare(proc, [GRORule(proc), GRORule(proc)], [1.0, 2.0], 3)
    assert s.worst_margin == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ConfigError):
        growth_rate_compare(proc, [GRORule(proc)] * 3, [1, 1, 1], 2)


def test_three_investor_counterexample():
    lam_hat, y1, y1_float = three_investor_counterexample()
    assert lam_hat == pytest.approx(1 / 3, abs=1e-12)
    assert y1[0] == Fraction(11, 12) and y1[2] == 1
    assert y1_float[2] > y1_float[0]


def test_theorem4_audit_random():
    rng = np.random.default_rng(10)
    for k in range(5):
        proc = random_process(rng, 2, 3, 2, zero_rate_prob=0.0, rate_range=(0.7, 1.3))
        s = theorem4_audit(proc, [1.0, 0.5], 100, k, 1)
        assert s.passed
        assert s.details["max_growth_W_residual"] <= 1e-9


def test_constant_payoff_closed_form():
    for w0 in (1.0, 5.0, 2.0, 0.1):
        wp = constant_payoff_wealth([2.0], 1.0, [w0 / 2, w0 / 2], 100)
        assert wp[0] == w0
        assert np.all(wp[1:] == max(w0, 2.0))


def test_discount_reduction():
    proc = random_process(np.random.default_rng(11), 2, 3, 2, zero_rate_prob=0.0,
                          rate_range=(0.6, 1.6))
    red = discount_reduction_check(proc, [1.0, 2.0], 200, 0)
    assert red["same_path"] and red["max_wealth_rel_diff"] <= 1e-9
    assert red["max_proportion_diff"] <= 1e-9
