"""Exact and Monte Carlo checks of the GRO strategy's properties.

One-step conditional expectations are computed exactly by enumerating the
atoms of the conditional payoff law. Monte Carlo is used only for limit
statements (dominance, divergence of discounted wealth).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .engine import TrajectoryRecord, discounted_series, path_rng, simulate, step_wealth
from .payoff import (ConfigError, DiscountedProcess, DiscountingError, DiscreteDistribution,
                     PayoffProcess, expect)
from .strategies import (ConstantRule, GRORule, History, ScriptedRule, ShiftedGRORule,
                         as_proportions, representative)
from .zeta import DEFAULT_TOL, gro_proportions

DRIFT_TOL = 1e-9


# ---------------------------------------------------------------- inequalities

def gibbs_gap(alpha, beta) -> float:
    """``alpha.(ln alpha - ln beta) - (||alpha-beta||^2/4 + |alpha| - |beta|)``.

    Non-negative for admissible inputs: non-negative vectors with sums at
    most one and ``alpha`` vanishing wherever ``beta`` does.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if a.shape != b.shape or np.any(a < 0) or np.any(b < 0):
        raise ValueError("alpha and beta must be non-negative vectors of equal length")
    if a.sum() > 1.0 + 1e-12 or b.sum() > 1.0 + 1e-12:
        raise ValueError("alpha and beta must have sums at most 1")
    if np.any((b == 0) & (a > 0)):
        raise ValueError("alpha must vanish wherever beta does")
    pos = a > 0
    lhs = math.fsum(a[pos] * (np.log(a[pos]) - np.log(b[pos])))
    d = a - b
    rhs = math.fsum(d * d) / 4.0 + math.fsum(a) - math.fsum(b)
    return lhs - rhs


# ---------------------------------------------------------------- exact drift

def next_wealth_per_atom(profile, wealth, rho: float, payoffs) -> np.ndarray:
    """Wealth after one period for every payoff atom (rows) and investor (cols)."""
    lam = np.asarray(profile, dtype=float)
    y = np.asarray(wealth, dtype=float)
    xs = np.atleast_2d(np.asarray(payoffs, dtype=float))
    p = y @ lam
    stake = lam * y[:, None]
    share = np.where(p > 0.0, stake / np.where(p > 0.0, p, 1.0), 0.0)
    return rho * (1.0 - lam.sum(axis=1)) * y + xs @ share.T


@dataclass
class DriftRow:
    investor: int
    r: float
    drift: float
    lower_bound: float
    ig: float
    ih: float
    proportions: list
    representative: list

    @property
    def margin(self) -> float:
        return self.drift - self.lower_bound


def exact_drift(proc, state, wealth, profile, m: int) -> DriftRow:
    """Exact ``E(ln r_t - ln r_{t-1} | F_{t-1})`` for investor ``m``.

    Also returns the compensator lower bound ``(1-r)^2 ||lam - lam~||^2 / 4``
    and the two integrals ``I^g``, ``I^h`` bounding the drift from below when
    ``m`` plays GRO.
    """
    y = np.asarray(wealth, dtype=float)
    lam_all = np.asarray(profile, dtype=float)
    if not y[m] > 0.0:
        raise ValueError(f"investor {m} has no wealth")
    w = math.fsum(y)
    rel = y / w
    r = rel[m]
    lam = lam_all[m]
    lt = representative(lam_all, rel, m)
    rho = proc.rate(state)
    K = proc.law(state, w)

    nxt = next_wealth_per_atom(lam_all, y, rho, K.payoffs)
    terms = []
    for q, row in zip(K.probs, nxt):
        ym, wn = row[m], math.fsum(row)
        if ym <= 0.0:
            terms.append(-math.inf)
        else:
            terms.append(math.log(ym / y[m]) - math.log(wn / w))
    neg_inf = any(v == -math.inf for v in terms)
    drift = -math.inf if neg_inf else math.fsum(q * v for q, v in zip(K.probs, terms))

    d = lam - lt
    lower = 0.25 * (1.0 - r) ** 2 * float(d @ d)

    mix = r * lam + (1.0 - r) * lt
    pos = lam > 0.0
    ig = math.fsum(lam[pos] * np.log(lam[pos] / mix[pos]))

    zeta = (1.0 - lam.sum()) * w
    zeta_t = (1.0 - lt.sum()) * w
    ih_terms = []
    for q, nx in zip(K.probs, K.norms):
        den = zeta * rho + nx
        if den > 0.0:
            ih_terms.append(q * (1.0 - r) * (zeta - zeta_t) * rho / den)
    ih = math.fsum(ih_terms)
    return DriftRow(m, float(r), drift, lower, ig, ih, lam.tolist(), lt.tolist())


def exact_relative_drift(proc, state, wealth, profile, m: int) -> float:
    """Exact ``E(r_t - r_{t-1} | F_{t-1})`` on the arithmetic scale."""
    y = np.asarray(wealth, dtype=float)
    w = math.fsum(y)
    K = proc.law(state, w)
    nxt = next_wealth_per_atom(profile, y, proc.rate(state), K.payoffs)
    tot = nxt.sum(axis=1)
    r_next = np.where(tot > 0, nxt[:, m] / np.where(tot > 0, tot, 1.0), 0.0)
    return math.fsum(np.asarray(K.probs) * r_next) - y[m] / w


def log_drift_from_f(proc, state, wealth, profile, m: int) -> float:
    """Same drift as :func:`exact_drift`, via the closed form ``f_t(x)``.

    ``f_t(x) = ln((zeta rho + F x) / (r zeta rho + (1-r) zeta~ rho + |x|))``
    with ``zeta = (1-|lam|) W``; only valid when no atom wipes investor ``m`` out.
    """
    y = np.asarray(wealth, dtype=float)
    lam_all = np.asarray(profile, dtype=float)
    w = math.fsum(y)
    r = y[m] / w
    lam = lam_all[m]
    lt = representative(lam_all, y / w, m)
    mix = r * lam + (1.0 - r) * lt
    F = np.where(mix > 0, lam / np.where(mix > 0, mix, 1.0), 0.0)
    rho = proc.rate(state)
    zeta = (1.0 - lam.sum()) * w
    zeta_t = (1.0 - lt.sum()) * w
    K = proc.law(state, w)

    def f(x):
        num = zeta * rho + F @ x
        if num <= 0.0:
            return -math.inf
        return math.log(num / (r * zeta * rho + (1.0 - r) * zeta_t * rho + x.sum()))

    return expect(K, f)


# ---------------------------------------------------------------- summaries

@dataclass
class Violation:
    check: str
    path: int
    step: int
    investor: int
    value: float
    bound: float


@dataclass
class ExperimentSummary:
    name: str
    passed: bool
    paths: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    worst_margin: float = math.inf
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["violations"] = d["violations"][:20]
        d["n_violations"] = len(self.violations)
        return _jsonable(d)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def growth_rates(record: TrajectoryRecord) -> np.ndarray:
    """``(1/T) ln(Y_T / Y_0)`` per investor; ``-inf`` for investors wiped out."""
    y0, yT = record.wealth[0], record.wealth[-1]
    with np.errstate(divide="ignore"):
        return np.log(yT / y0) / record.horizon


def path_stats(record: TrajectoryRecord) -> dict:
    rel = record.relative
    stats = {
        "min_r": rel.min(axis=0).tolist(),
        "terminal_r": rel[-1].tolist(),
        "growth_rate": growth_rates(record).tolist(),
        "terminal_W": float(record.total[-1]),
        "ruined_at": record.ruined_at,
    }
    try:
        stats["terminal_Wprime"] = float(discounted_series(record)[-1])
    except DiscountingError:
        stats["terminal_Wprime"] = None
    return stats


def aggregate(paths: list[dict]) -> dict:
    out = {}
    for key in ("min_r", "terminal_r", "growth_rate"):
        a = np.array([p[key] for p in paths], dtype=float)
        with np.errstate(invalid="ignore"):
            out[key] = {"mean": np.mean(a, axis=0).tolist(),
                        "q05": np.quantile(a, 0.05, axis=0).tolist(),
                        "median": np.median(a, axis=0).tolist(),
                        "q95": np.quantile(a, 0.95, axis=0).tolist()}
    return out


def _gro_indices(rules) -> list[int]:
    return [i for i, r in enumerate(rules) if getattr(r, "kind", None) == "gro"]


# ---------------------------------------------------------------- audits

def submartingale_audit(proc, rules, initial_wealth, horizon: int, seed: int, paths: int,
                        gro: Sequence[int] | None = None, tol: float = DRIFT_TOL,
                        name: str = "drift") -> ExperimentSummary:
    """Check every GRO investor's exact one-step log-drift along simulated paths.

    At each step the drift must be at least ``-tol`` and at least the
    compensator bound minus ``tol``.
    """
    gro = _gro_indices(rules) if gro is None else list(gro)
    if not gro:
        raise ConfigError("submartingale audit needs at least one GRO investor")
    violations: list[Violation] = []
    worst = math.inf
    min_drift = math.inf
    n_checks = 0
    stats = []
    for i in range(paths):
        def observe(t, state, y, lam, i=i):
            nonlocal worst, min_drift, n_checks
            for m in gro:
                row = exact_drift(proc, state, y, lam, m)
                n_checks += 1
                worst = min(worst, row.margin)
                min_drift = min(min_drift, row.drift)
                if not row.drift >= -tol:
                    violations.append(Violation("drift>=0", i, t, m, row.drift, -tol))
                if not row.drift >= row.lower_bound - tol:
                    violations.append(Violation("drift>=bound", i, t, m, row.drift,
                                                row.lower_bound - tol))
        rec = simulate(proc, rules, initial_wealth, horizon, path_rng(seed, i), observe)
        stats.append(path_stats(rec))
    return ExperimentSummary(name, not violations, stats, aggregate(stats), violations, worst,
                             {"checks": n_checks, "min_drift": min_drift, "gro": gro})


def dominance_test(proc, rules, initial_wealth, horizon: int, seed: int, paths: int,
                   gro_index: int = 0, threshold: float = 0.99,
                   min_fraction: float = 1.0) -> ExperimentSummary:
    """Terminal relative wealth of the GRO investor against persistently different opponents."""
    stats, hits = [], 0
    for i in range(paths):
        rec = simulate(proc, rules, initial_wealth, horizon, path_rng(seed, i))
        s = path_stats(rec)
        stats.append(s)
        hits += s["terminal_r"][gro_index] >= threshold
    frac = hits / paths
    return ExperimentSummary("dominance", frac >= min_fraction, stats, aggregate(stats),
                             details={"fraction_at_threshold": frac, "hits": hits,
                                      "threshold": threshold, "min_fraction": min_fraction})


def survival_test(proc, rules, initial_wealth, horizon: int, seed: int, paths: int,
                  gro_index: int = 0, report_floor: float = 1e-6) -> ExperimentSummary:
    """Minimum over each path of the GRO investor's relative wealth; must stay positive."""
    stats = []
    for i in range(paths):
        rec = simulate(proc, rules, initial_wealth, horizon, path_rng(seed, i))
        stats.append(path_stats(rec))
    mins = np.array([s["min_r"][gro_index] for s in stats])
    return ExperimentSummary("survival", bool(np.all(mins > 0.0)), stats, aggregate(stats),
                             worst_margin=float(mins.min()),
                             details={"min_of_min_r": float(mins.min()),
                                      "below_floor": int(np.sum(mins < report_floor)),
                                      "report_floor": report_floor})


# ---------------------------------------------------------------- growth rates

def expected_log_growth(proc, rules, wealth, state, depth: int, t0: int = 0,
                        past_profiles: list | None = None) -> np.ndarray:
    """Exact ``E(ln(Y_{s+depth}^m / Y_s^m) | F_s)`` for every investor ``m``.

    Enumerates the whole payoff tree below ``state``; ``ln 0 = -inf``.
    """
    y0 = np.asarray(wealth, dtype=float)
    m = len(rules)
    acc = [[] for _ in range(m)]
    dead = [False] * m
    hist0 = list(past_profiles or [])

    def walk(t, s, y, prob, profiles):
        if t == t0 + depth:
            for k in range(m):
                if y[k] <= 0.0:
                    dead[k] = True
                else:
                    acc[k].append(prob * math.log(y[k] / y0[k]))
            return
        hist = History(initial_wealth=y0, past_profiles=profiles, current_state=s,
                       current_wealth=y)
        w = math.fsum(y)
        if w > 0.0:
            lam = np.vstack([as_proportions(rule(t + 1, hist), proc.dim) for rule in rules])
        else:
            lam = np.zeros((m, proc.dim))
        rho = proc.rate(s)
        for tr in proc.transitions(s, w):
            walk(t + 1, tr.next_state, step_wealth(lam, y, rho, tr.payoff), prob * tr.prob,
                 profiles + [lam])

    walk(t0, state, y0, 1.0, hist0)
    return np.array([-math.inf if dead[k] else math.fsum(acc[k]) for k in range(m)])


def growth_rate_compare(proc, rules, initial_wealth, depth: int) -> ExperimentSummary:
    """Two-investor t-step comparison: GRO investor 0 must not be beaten in expectation."""
    if len(rules) != 2:
        raise ConfigError("t-step growth comparison is only claimed for two investors")
    e = expected_log_growth(proc, rules, initial_wealth, proc.initial_state, depth)
    ok = bool(e[0] >= e[1] - 1e-12)
    return ExperimentSummary("growth", ok, worst_margin=float(e[0] - e[1]),
                             details={"expected_log_growth": e.tolist(), "depth": depth})


def step_wealth_exact(profile, wealth, rho, payoff) -> list[Fraction]:
    """Wealth equation in exact rational arithmetic."""
    lam = [[Fraction(v) for v in row] for row in profile]
    y = [Fraction(v) for v in wealth]
    x = [Fraction(v) for v in payoff]
    rho = Fraction(rho)
    n = len(x)
    p = [sum(lam[k][j] * y[k] for k in range(len(y))) for j in range(n)]
    out = []
    for k in range(len(y)):
        v = rho * (1 - sum(lam[k])) * y[k]
        for j in range(n):
            if p[j] > 0:
                v += lam[k][j] * y[k] / p[j] * x[j]
        out.append(v)
    return out


def three_investor_counterexample():
    """One non-random period where a cash-only investor beats GRO.

    Returns the GRO proportion computed by the solver and the exact wealth
    vector after one step with proportions ``(1/3, 1, 0)``.
    """
    K = DiscreteDistribution.point_mass([1.0])
    lam_hat = float(gro_proportions(3.0, 1.0, K)[0])
    y1 = step_wealth_exact([[Fraction(1, 3)], [1], [0]], [1, 1, 1], 1, [1])
    y1_float = step_wealth([[lam_hat], [1.0], [0.0]], [1.0, 1.0, 1.0], 1.0, [1.0])
    return lam_hat, y1, y1_float


# ---------------------------------------------------------------- discounted wealth

def theorem4_audit(proc, initial_wealth, horizon: int, seed: int, paths: int,
                   growth_factor: float | None = None, tol: float = DRIFT_TOL) -> ExperimentSummary:
    """All-GRO market: ``1/W'`` is a supermartingale and ``W'`` obeys its recursion.

    Checks (a) the exact one-step bound ``E(1/W'_t | F_{t-1}) <= 1/W'_{t-1}``,
    (b) ``W'_t = (1 - |lam_t|) W'_{t-1} + |X'_t|`` at every step, and, when
    ``growth_factor`` is given, (c) ``W'_T >= growth_factor * W_0`` on each path.
    """
    m = len(initial_wealth)
    rules = [GRORule(proc) for _ in range(m)]
    violations: list[Violation] = []
    worst_super = -math.inf
    worst_rec = 0.0
    stats = []
    w0 = math.fsum(initial_wealth)
    for i in range(paths):
        disc = [1.0]

        def observe(t, state, y, lam, i=i):
            nonlocal worst_super
            rho = proc.rate(state)
            if rho <= 0.0:
                raise DiscountingError(f"interest factor is zero at t={t}")
            w = math.fsum(y)
            K = proc.law(state, w)
            d_prev = disc[-1]
            nxt = next_wealth_per_atom(lam, y, rho, K.payoffs).sum(axis=1)
            e_inv = math.fsum(q * d_prev * rho / wn for q, wn in zip(K.probs, nxt))
            gap = e_inv - d_prev / w
            worst_super = max(worst_super, gap)
            if gap > tol:
                violations.append(Violation("E[1/W']<=1/W'", i, t, -1, e_inv, d_prev / w + tol))
            disc.append(d_prev * rho)

        rec = simulate(proc, rules, initial_wealth, horizon, path_rng(seed, i), observe)
        wp = discounted_series(rec)
        xp = rec.discounted_payoffs.sum(axis=1)
        cash = 1.0 - rec.profiles[:, 0, :].sum(axis=1)
        pred = cash * wp[:-1] + xp
        resid = np.abs(wp[1:] - pred) / np.maximum(np.abs(wp[1:]), 1e-300)
        worst_rec = max(worst_rec, float(resid.max()))
        for t in np.nonzero(resid > tol)[0][:5]:
            violations.append(Violation("growth-W", i, int(t) + 1, -1, float(wp[t + 1]),
                                        float(pred[t])))
        s = path_stats(rec)
        if growth_factor is not None and not s["terminal_Wprime"] >= growth_factor * w0:
            violations.append(Violation("W'_T growth", i, horizon, -1, s["terminal_Wprime"],
                                        growth_factor * w0))
        stats.append(s)
    wT = [s["terminal_Wprime"] for s in stats]
    return ExperimentSummary("theorem4", not violations, stats, aggregate(stats), violations,
                             worst_margin=-worst_super,
                             details={"max_supermartingale_gap": worst_super,
                                      "max_growth_W_residual": worst_rec,
                                      "min_terminal_Wprime": min(wT), "W0": w0,
                                      "growth_factor": growth_factor})


def constant_payoff_wealth(payoff, rho: float, initial_wealth, horizon: int) -> np.ndarray:
    """All-GRO discounted wealth path under a constant payoff vector."""
    proc = PayoffProcess.iid(DiscreteDistribution.point_mass(payoff), rho)
    rules = [GRORule(proc) for _ in initial_wealth]
    rec = simulate(proc, rules, initial_wealth, horizon, path_rng(0, 0))
    return discounted_series(rec)


def discount_reduction_check(proc, initial_wealth, horizon: int, seed: int,
                             path: int = 0) -> dict:
    """Compare the discounted all-GRO path with the all-GRO path of ``(X/D, 1)``."""
    m = len(initial_wealth)
    rec1 = simulate(proc, [GRORule(proc) for _ in range(m)], initial_wealth, horizon,
                    path_rng(seed, path))
    dproc = DiscountedProcess(proc)
    rec2 = simulate(dproc, [GRORule(dproc) for _ in range(m)], initial_wealth, horizon,
                    path_rng(seed, path))
    w1 = discounted_series(rec1)
    w2 = rec2.total
    return {
        "max_wealth_rel_diff": float(np.max(np.abs(w1 - w2) / np.abs(w1))),
        "max_proportion_diff": float(np.max(np.abs(rec1.profiles - rec2.profiles))),
        "same_path": [s for s, _ in rec2.states[1:]] == rec1.states[1:],
    }


# ---------------------------------------------------------------- random markets

def random_process(rng: np.random.Generator, n_assets: int, n_atoms: int,
                   n_states: int = 1, zero_rate_prob: float = 0.2,
                   rate_range=(0.5, 1.5)) -> PayoffProcess:
    """Random valid Markov payoff process.

    Payoff components are exponential with some exact zeros; a state with
    zero interest factor never gets an all-zero payoff atom.
    """
    states = [f"s{k}" for k in range(n_states)]
    rates, trans = {}, {}
    for s in states:
        rho = 0.0 if rng.random() < zero_rate_prob else float(rng.uniform(*rate_range))
        rates[s] = rho
        probs = rng.dirichlet(np.ones(n_atoms))
        probs = np.maximum(probs, 1e-3)
        probs /= probs.sum()
        atoms = []
        for q in probs:
            x = rng.exponential(1.0, n_assets) * (rng.random(n_assets) > 0.25)
            if x.sum() == 0.0 and (rho == 0.0 or rng.random() < 0.5):
                x[rng.integers(n_assets)] = rng.exponential(1.0) + 0.05
            atoms.append((states[rng.integers(n_states)], x.tolist(), float(q)))
        trans[s] = atoms
    return PayoffProcess(trans, rates, states[0])


def random_proportions(rng: np.random.Generator, n: int) -> np.ndarray:
    kind = rng.integers(4)
    if kind == 0:
        v = rng.dirichlet(np.ones(n))
    elif kind == 1:
        v = rng.dirichlet(np.ones(n)) * rng.uniform(0, 1)
    elif kind == 2:
        v = np.zeros(n)
        v[rng.integers(n)] = 1.0
    else:
        v = rng.dirichlet(np.ones(n + 1))[:n]
    return as_proportions(np.clip(v, 0, 1) / max(1.0, v.sum()))


@dataclass
class BlendedGRORule:
    """Convex mix ``(1-w) * GRO + w * target``; a near-optimal opponent."""

    proc: object
    weight: float
    target: np.ndarray
    kind = "blend"

    def __post_init__(self):
        self._gro = GRORule(self.proc)

    def __call__(self, t, history):
        return (1.0 - self.weight) * self._gro(t, history) + self.weight * self.target


def random_opponent(rng: np.random.Generator, proc, horizon: int):
    kind = rng.integers(4)
    if kind == 3:
        return BlendedGRORule(proc, float(rng.uniform(0.05, 0.5)),
                              random_proportions(rng, proc.dim))
    if kind == 0:
        return ConstantRule(random_proportions(rng, proc.dim))
    if kind == 1:
        table = {s: random_proportions(rng, proc.dim) for s in proc.states}
        return ScriptedRule(table)
    table = {t: random_proportions(rng, proc.dim) for t in range(1, horizon + 1)}
    return ScriptedRule(table)


def random_market(rng: np.random.Generator, horizon: int, m_range=(2, 5), n_range=(1, 4),
                  atom_range=(2, 5), state_range=(1, 3)):
    """One GRO investor (index 0) against random opponents in a random market."""
    M = int(rng.integers(m_range[0], m_range[1] + 1))
    N = int(rng.integers(n_range[0], n_range[1] + 1))
    A = int(rng.integers(atom_range[0], atom_range[1] + 1))
    S = int(rng.integers(state_range[0], state_range[1] + 1))
    proc = random_process(rng, N, A, S)
    rules = [GRORule(proc)] + [random_opponent(rng, proc, horizon) for _ in range(M - 1)]
    y0 = rng.uniform(0.5, 2.0, M).tolist()
    return proc, rules, y0


def shifted_opponent_market(eps: float = 0.2):
    """Two investors, two-atom iid payoff; investor 1 is GRO shifted by ``eps``."""
    K = DiscreteDistribution.from_atoms([([0.5], 0.5), ([2.0], 0.5)])
    proc = PayoffProcess.iid(K, 1.0)
    return proc, [GRORule(proc), ShiftedGRORule(proc, eps)], [1.0, 1.0]
