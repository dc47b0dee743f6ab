"""Verification suites behind ``gromarket verify`` and the acceptance tests.

Each suite returns a :class:`SuiteResult`; defaults are the acceptance-scale
parameters.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import example6
from .config import DEFAULT_THRESHOLDS
from .engine import path_rng, simulate
from .harness import (ExperimentSummary, constant_payoff_wealth, discount_reduction_check,
                      gibbs_gap, growth_rate_compare, random_market, random_opponent,
                      random_process, shifted_opponent_market, submartingale_audit,
                      survival_test, theorem4_audit, dominance_test,
                      three_investor_counterexample, _jsonable)
from .payoff import DiscreteDistribution, PayoffProcess
from .strategies import GRORule
from .zeta import gro_proportions, solve_zeta, zeta_residual

SUITES = ("gibbs", "drift", "dominance", "survival", "growth", "theorem4", "example6")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self):
        return _jsonable({"name": self.name, "passed": self.passed, "checks": self.checks,
                          "details": self.details, "seconds": self.seconds})


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# ---------------------------------------------------------------- Gibbs inequality

def gibbs_gap_batch(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Row-wise :func:`gibbs_gap` for pre-validated arrays."""
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(alpha > 0, alpha * (np.log(alpha) - np.log(np.where(beta > 0, beta, 1))), 0)
    d = alpha - beta
    return logs.sum(axis=1) - ((d * d).sum(axis=1) / 4 + alpha.sum(axis=1) - beta.sum(axis=1))


def random_gibbs_pairs(rng: np.random.Generator, count: int, n: int):
    """Admissible ``(alpha, beta)`` rows, a fifth of them on the boundary."""
    beta = rng.dirichlet(np.ones(n), count) * rng.uniform(0, 1, (count, 1))
    alpha = rng.dirichlet(np.ones(n), count) * rng.uniform(0, 1, (count, 1))
    case = rng.integers(0, 10, count)
    full_b = case == 1
    beta[full_b] /= beta[full_b].sum(axis=1, keepdims=True)
    full_a = case == 2
    alpha[full_a] /= alpha[full_a].sum(axis=1, keepdims=True)
    alpha[case == 3] = 0.0
    beta[case == 4] = alpha[case == 4]
    zeros = rng.random((count, n)) < 0.3
    zeros[case != 5] = False
    beta[zeros] = 0.0
    alpha[zeros] = 0.0
    both = case == 6
    beta[both] /= beta[both].sum(axis=1, keepdims=True)
    alpha[both] /= alpha[both].sum(axis=1, keepdims=True)
    beta[case == 7] = 0.0
    alpha[case == 7] = 0.0
    # a vanishing beta forces alpha to vanish too
    alpha[beta == 0] = 0.0
    return alpha, beta


@_timed
def gibbs_suite(count: int = 100_000, seed: int = 0, tol: float = 1e-12) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst, total = math.inf, 0
    per_n = -(-count // 5)
    for n in range(1, 6):
        a, b = random_gibbs_pairs(rng, per_n, n)
        g = gibbs_gap_batch(a, b)
        worst = min(worst, float(g.min()))
        total += len(g)
        # scalar implementation on a subsample
        for i in range(0, per_n, 997):
            assert math.isclose(gibbs_gap(a[i], b[i]), g[i], rel_tol=1e-9, abs_tol=1e-12)
    return SuiteResult("gibbs", worst >= -tol, {"min_gap>=-1e-12": worst >= -tol},
                       {"pairs": total, "min_gap": worst})


# ---------------------------------------------------------------- zeta solver

def random_zeta_instance(rng: np.random.Generator):
    n = int(rng.integers(1, 5))
    k = int(rng.integers(1, 6))
    probs = rng.dirichlet(np.ones(k))
    probs = np.maximum(probs, 1e-3)
    probs /= probs.sum()
    payoffs = rng.exponential(1.0, (k, n)) * (rng.random((k, n)) > 0.2)
    for row in payoffs:
        if row.sum() == 0 and rng.random() < 0.7:
            row[0] = 0.1 + rng.exponential(1.0)
    K = DiscreteDistribution(tuple(map(tuple, payoffs)), tuple(probs))
    c = float(np.exp(rng.uniform(np.log(0.05), np.log(20))))
    rho = float(rng.uniform(0.1, 2.0))
    return c, rho, K


@_timed
def zeta_suite(count: int = 1000, seed: int = 1, tol: float = 1e-10) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst_res, on_gamma, worst_cash = 0.0, 0, 0.0
    for _ in range(count):
        c, rho, K = random_zeta_instance(rng)
        sol = solve_zeta(c, rho, K)
        lam = gro_proportions(c, rho, K)
        worst_cash = max(worst_cash, abs(lam.sum() - (1 - sol.zeta / c)))
        if sol.in_gamma:
            on_gamma += 1
            worst_res = max(worst_res, abs(zeta_residual(sol.zeta, c, rho, K)))
    worst_pm = 0.0
    for _ in range(count):
        c = float(rng.uniform(0.01, 20))
        x = float(rng.uniform(0.01, 20))
        K = DiscreteDistribution.point_mass([x])
        worst_pm = max(worst_pm, abs(solve_zeta(c, 1.0, K).zeta - max(c - x, 0.0)))
    K2 = DiscreteDistribution.from_atoms([([0.5], 0.5), ([2.0], 0.5)])
    quad_err = abs(solve_zeta(1.0, 1.0, K2).zeta - (-3 + math.sqrt(13)) / 4)
    checks = {"residual<=1e-10": worst_res <= tol, "point_mass<=1e-10": worst_pm <= tol,
              "quadratic<=1e-10": quad_err <= tol, "cash_identity<=1e-10": worst_cash <= tol}
    return SuiteResult("zeta", all(checks.values()), checks,
                       {"instances": count, "on_gamma": on_gamma, "max_residual": worst_res,
                        "max_point_mass_err": worst_pm, "quadratic_err": quad_err,
                        "max_cash_identity_err": worst_cash})


# ---------------------------------------------------------------- drift and survival

def drift_markets(count: int = 100, horizon: int = 200, seed: int = 2, fault: float = 0.0):
    """Random markets with one GRO investor, plus one two-investor all-GRO market."""
    rng = np.random.default_rng(seed)
    markets = [random_market(rng, horizon) for _ in range(count)]
    proc = random_process(rng, 2, 3, 2)
    markets.append((proc, [GRORule(proc), GRORule(proc)], [1.0, 1.5]))
    if fault:
        for _, rules, _ in markets:
            rules[0].fault = fault
    return markets


@_timed
def drift_suite(count: int = 100, horizon: int = 200, seed: int = 2, fault: float = 0.0,
                tol: float = DEFAULT_THRESHOLDS["drift_tol"], markets=None) -> SuiteResult:
    markets = drift_markets(count, horizon, seed, fault) if markets is None else markets
    violations, worst, checks, min_r = [], math.inf, 0, math.inf
    summaries = []
    for k, (proc, rules, y0) in enumerate(markets):
        s = submartingale_audit(proc, rules, y0, horizon, seed + k, 1, gro=[0], tol=tol)
        summaries.append(s)
        worst = min(worst, s.worst_margin)
        checks += s.details["checks"]
        min_r = min(min_r, s.paths[0]["min_r"][0])
        for v in s.violations:
            violations.append({"market": k, **v.__dict__})
    ok = not violations
    return SuiteResult("drift", ok, {"zero_violations": ok},
                       {"markets": len(markets), "step_checks": checks, "worst_margin": worst,
                        "min_gro_relative_wealth": min_r, "violations": violations[:20],
                        "n_violations": len(violations)})


@_timed
def survival_suite(count: int = 100, horizon: int = 200, seed: int = 2,
                   floor: float = DEFAULT_THRESHOLDS["survival_floor"], markets=None) -> SuiteResult:
    markets = drift_markets(count, horizon, seed) if markets is None else markets
    mins = []
    for k, (proc, rules, y0) in enumerate(markets):
        s = survival_test(proc, rules, y0, horizon, seed + k, 1, 0, floor)
        mins.append(s.details["min_of_min_r"])
    mins = np.array(mins)
    ok = bool(np.all(mins > 0))
    return SuiteResult("survival", ok, {"min_r>0": ok},
                       {"min_of_min_r": float(mins.min()),
                        "paths_below_floor": int(np.sum(mins < floor)), "floor": floor})


# ---------------------------------------------------------------- equilibrium

@_timed
def equilibrium_suite(horizon: int = 1000, seed: int = 3, tol: float = 1e-9) -> SuiteResult:
    from .config import preset
    proc, rules, y0 = preset("all-gro").build()
    worst = 0.0
    rng = np.random.default_rng(seed)
    cases = [(proc, rules, y0)]
    for _ in range(4):
        p = random_process(rng, int(rng.integers(1, 4)), int(rng.integers(2, 6)),
                           int(rng.integers(1, 4)))
        m = int(rng.integers(2, 6))
        cases.append((p, [GRORule(p) for _ in range(m)], rng.uniform(0.5, 2, m).tolist()))
    for k, (p, r, y) in enumerate(cases):
        rec = simulate(p, r, y, horizon, path_rng(seed, k))
        rel = rec.relative
        worst = max(worst, float(np.max(np.abs(rel - rel[0]))))
    return SuiteResult("equilibrium", worst <= tol, {"r_constant<=1e-9": worst <= tol},
                       {"max_r_deviation": worst, "markets": len(cases)})


# ---------------------------------------------------------------- dominance

@_timed
def dominance_suite(paths: int = 64, horizon: int = 5000, seed: int = 4, eps: float = 0.2,
                    threshold: float = DEFAULT_THRESHOLDS["dominance_r"],
                    min_fraction: float = DEFAULT_THRESHOLDS["dominance_fraction"],
                    market=None) -> SuiteResult:
    proc, rules, y0 = shifted_opponent_market(eps) if market is None else market
    s = dominance_test(proc, rules, y0, horizon, seed, paths, 0, threshold, min_fraction)
    terminal = [p["terminal_r"][0] for p in s.paths]
    return SuiteResult("dominance", s.passed, {f"r_T>={threshold} on >= {min_fraction:.4f}": s.passed},
                       {**s.details, "min_terminal_r": min(terminal), "paths": paths})


# ---------------------------------------------------------------- growth rates

@_timed
def growth_suite(count: int = 20, depth: int = 4, seed: int = 5) -> SuiteResult:
    rng = np.random.default_rng(seed)
    margins, fails = [], []
    for k in range(count):
        n = int(rng.integers(1, 4))
        proc = random_process(rng, n, int(rng.integers(2, 4)), int(rng.integers(1, 3)))
        rules = [GRORule(proc), random_opponent(rng, proc, depth)]
        y0 = rng.uniform(0.5, 2.0, 2).tolist()
        s = growth_rate_compare(proc, rules, y0, depth)
        margins.append(s.worst_margin)
        if not s.passed:
            fails.append({"config": k, **s.details})
    lam_hat, y1, _ = three_investor_counterexample()
    from fractions import Fraction
    counter_ok = abs(lam_hat - 1 / 3) <= 1e-12 and y1[0] == Fraction(11, 12) and y1[2] == 1
    checks = {"t_step_comparison": not fails, "m3_counterexample": counter_ok}
    return SuiteResult("growth", all(checks.values()), checks,
                       {"min_margin": float(min(margins)), "failures": fails,
                        "counterexample_Y1": [str(v) for v in y1], "lambda_hat": lam_hat})


# ---------------------------------------------------------------- discounted wealth

@_timed
def theorem4_suite(runs: int = 50, run_horizon: int = 200, paths: int = 32,
                   horizon: int = 10_000, seed: int = 6,
                   growth_factor: float = DEFAULT_THRESHOLDS["growth_factor"],
                   tol: float = 1e-9) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst_gap, worst_rec, bad = -math.inf, 0.0, 0
    for k in range(runs):
        proc = random_process(rng, int(rng.integers(1, 4)), int(rng.integers(2, 6)),
                              int(rng.integers(1, 4)), zero_rate_prob=0.0, rate_range=(0.7, 1.3))
        m = int(rng.integers(2, 5))
        s = theorem4_audit(proc, rng.uniform(0.5, 2.0, m).tolist(), run_horizon, seed + k, 1,
                           tol=tol)
        worst_gap = max(worst_gap, s.details["max_supermartingale_gap"])
        worst_rec = max(worst_rec, s.details["max_growth_W_residual"])
        bad += not s.passed

    const = {}
    for w0 in (1.0, 5.0):
        wp = constant_payoff_wealth([2.0], 1.0, [w0 / 2, w0 / 2], 1000)
        const[w0] = float(np.max(np.abs(wp[1:] - max(w0, 2.0))))
    const_ok = all(v == 0.0 for v in const.values())

    K = DiscreteDistribution.from_atoms([([0.5], 0.5), ([2.0], 0.5)])
    proc = PayoffProcess.iid(K, 1.0)
    div = theorem4_audit(proc, [0.5, 0.5], horizon, seed, paths, growth_factor, tol)

    red_proc = random_process(np.random.default_rng(seed + 1), 2, 3, 3, zero_rate_prob=0.0,
                              rate_range=(0.6, 1.6))
    red = discount_reduction_check(red_proc, [1.0, 0.7, 1.3], 500, seed)
    red_ok = red["same_path"] and red["max_wealth_rel_diff"] <= tol and red["max_proportion_diff"] <= tol

    checks = {"a_supermartingale": bad == 0 and worst_gap <= tol,
              "b_growth_W_residual": worst_rec <= tol,
              "c_constant_payoff": const_ok,
              "d_divergence": div.passed,
              "e_discount_reduction": red_ok}
    return SuiteResult("theorem4", all(checks.values()), checks,
                       {"max_supermartingale_gap": worst_gap, "max_growth_W_residual": worst_rec,
                        "constant_payoff_max_err": {str(k): v for k, v in const.items()},
                        "min_terminal_Wprime": div.details["min_terminal_Wprime"],
                        "divergence_threshold": growth_factor * 1.0,
                        "reduction": red})


# ---------------------------------------------------------------- vanishing wealth example

@_timed
def example6_suite(horizon: int = 10_000, long_horizon: int = 1_000_000,
                   ruin_fraction: float = DEFAULT_THRESHOLDS["ruin_fraction"],
                   tol: float = 1e-9) -> SuiteResult:
    rec = example6.simulate_example(horizon)
    orc = example6.oracle(horizon)
    err_r = float(np.max(np.abs(rec.relative[1:, 1] / orc["r2"] - 1)))
    err_w = float(np.max(np.abs(rec.total[1:] / orc["W"] - 1)))
    gro_half = float(np.max(np.abs(rec.profiles[:, 0, 0] - 0.5)))

    long = example6.oracle(long_horizon)
    alpha, t = long["alpha"], np.arange(1, long_horizon + 1)
    alpha_ok = bool(np.all((alpha > 0) & (alpha < 1)))
    alpha_t2 = float(np.max(alpha * t * t))
    r2 = long["r2"]
    r_end, r_half = float(r2[-1]), float(r2[long_horizon // 2 - 1])
    w_ratio = float(long["W"][-1] / long["W"][0])

    zero = example6.simulate_example(horizon, investor1="zero")
    zero_err = float(np.max(np.abs(zero.wealth[:, 0] - 1.0)))

    checks = {"engine_matches_oracle": max(err_r, err_w) <= tol,
              "gro_is_half": gro_half <= 1e-12,
              "alpha_in_(0,1)": alpha_ok,
              "alpha_t2_bounded": alpha_t2 <= 0.125,
              "r2_converges": abs(r_end - r_half) < 1e-6 and r_end > 0,
              f"W_T<{ruin_fraction}*W_1": w_ratio < ruin_fraction,
              "zero_strategy_keeps_1": zero_err == 0.0}
    return SuiteResult("example6", all(checks.values()), checks,
                       {"engine_rel_err_r2": err_r, "engine_rel_err_W": err_w,
                        "max_alpha_t2": alpha_t2, "r2_T": r_end, "r2_T/2": r_half,
                        "W_T/W_1": w_ratio, "zero_strategy_max_dev": zero_err})


RUNNERS = {
    "gibbs": gibbs_suite,
    "drift": drift_suite,
    "dominance": dominance_suite,
    "survival": survival_suite,
    "growth": growth_suite,
    "theorem4": theorem4_suite,
    "example6": example6_suite,
}
