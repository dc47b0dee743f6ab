"""Market clearing, the wealth equation and trajectory simulation."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .payoff import ConfigError, DiscountingError
from .strategies import History, as_proportions

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    def __init__(self, step: int, msg: str):
        super().__init__(f"step {step}: {msg}")
        self.step = step


def clear_prices(profile, wealth) -> np.ndarray:
    """``p^n = sum_m lambda^{m,n} Y^m`` (unit supply of every asset)."""
    return np.asarray(wealth, dtype=float) @ np.asarray(profile, dtype=float)


def step_wealth(profile, wealth, rho: float, payoff) -> np.ndarray:
    """One application of the wealth equation.

    Cash grows by ``rho``; each asset's payoff is split in proportion to money
    committed to it. Payoffs of assets nobody bought are lost.
    """
    lam = np.asarray(profile, dtype=float)
    y = np.asarray(wealth, dtype=float)
    x = np.asarray(payoff, dtype=float)
    p = y @ lam
    # share of each asset held; bounded by 1, so tiny prices cannot overflow
    share = np.where(p > 0.0, lam * y[:, None] / np.where(p > 0.0, p, 1.0), 0.0)
    return rho * (1.0 - lam.sum(axis=1)) * y + share @ x


def relative_wealth(wealth) -> np.ndarray:
    y = np.asarray(wealth, dtype=float)
    w = math.fsum(y)
    if w <= 0.0:
        return np.zeros_like(y)
    return y / w


@dataclass
class TrajectoryRecord:
    """Per-period log of one simulated path.

    Arrays indexed by period: ``wealth[t]`` for ``t = 0..T``; ``profiles``,
    ``prices``, ``payoffs`` and ``rates`` hold period ``t`` at index ``t-1``.
    """

    states: list
    rates: np.ndarray
    wealth: np.ndarray
    profiles: np.ndarray
    prices: np.ndarray
    payoffs: np.ndarray
    discount: np.ndarray
    ruined_at: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return len(self.rates)

    @property
    def total(self) -> np.ndarray:
        return self.wealth.sum(axis=1)

    @property
    def relative(self) -> np.ndarray:
        tot = self.total
        with np.errstate(invalid="ignore", divide="ignore"):
            r = self.wealth / tot[:, None]
        r[tot <= 0.0] = 0.0
        return r

    @property
    def discounted_payoffs(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.payoffs / self.discount[1:, None]

    def write_csv(self, path) -> None:
        m, n = self.wealth.shape[1], self.payoffs.shape[1]
        header = ["t", "state", "rho", "D", "W", "Wprime"]
        header += [f"X_{j + 1}" for j in range(n)] + [f"p_{j + 1}" for j in range(n)]
        for i in range(m):
            header += [f"Y_{i + 1}", f"r_{i + 1}"] + [f"lambda_{i + 1}_{j + 1}" for j in range(n)]
        total, rel = self.total, self.relative
        fmt = "{:.17g}".format
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for t in range(self.horizon + 1):
                d = self.discount[t]
                wp = fmt(total[t] / d) if d > 0 else ""
                row = [t, self.states[t], fmt(self.rates[t - 1]) if t else "", fmt(d),
                       fmt(total[t]), wp]
                if t:
                    row += [fmt(v) for v in self.payoffs[t - 1]] + [fmt(v) for v in self.prices[t - 1]]
                else:
                    row += [""] * (2 * n)
                for i in range(m):
                    row += [fmt(self.wealth[t, i]), fmt(rel[t, i])]
                    row += [fmt(v) for v in self.profiles[t - 1, i]] if t else [""] * n
                w.writerow(row)


Observer = Callable[[int, object, np.ndarray, np.ndarray], None]


def simulate(proc, rules: Sequence, initial_wealth, horizon: int, rng: np.random.Generator,
             observer: Observer | None = None) -> TrajectoryRecord:
    """Run the market for ``horizon`` periods.

    All rules see the same history before prices form. ``observer``, if
    given, is called as ``observer(t, state, wealth_before, profile)`` after
    the profile for period ``t`` is fixed and before the payoff is drawn.
    """
    y = np.array(initial_wealth, dtype=float)
    m, n = len(rules), proc.dim
    if y.shape != (m,):
        raise ConfigError(f"need one initial wealth per rule ({m}), got {y.shape}")
    if np.any(~(y > 0.0)):
        raise ConfigError("initial wealth must be strictly positive")
    if horizon < 1:
        raise ConfigError("horizon must be at least 1")

    wealth = np.empty((horizon + 1, m))
    profiles = np.empty((horizon, m, n))
    prices = np.empty((horizon, n))
    payoffs = np.empty((horizon, n))
    rates = np.empty(horizon)
    discount = np.empty(horizon + 1)
    wealth[0], discount[0] = y, 1.0
    states = [proc.initial_state]
    hist = History(initial_wealth=y.copy(), current_state=proc.initial_state, current_wealth=y)
    ruined_at = None

    for t in range(1, horizon + 1):
        state = states[-1]
        total = math.fsum(y)
        if ruined_at is None and total <= 0.0:
            ruined_at = t - 1
            log.warning("total wealth hit zero at t=%d; continuing in absorbing state", t - 1)
        if ruined_at is not None:
            lam = np.zeros((m, n))
        else:
            try:
                lam = np.vstack([as_proportions(rule(t, hist), n) for rule in rules])
            except (ConfigError, ArithmeticError) as e:
                raise SimulationError(t, str(e)) from e
        if observer is not None:
            observer(t, state, y, lam)
        rho = proc.rate(state)
        nxt, x = proc.sample(state, rng, total)
        x = np.asarray(x, dtype=float)
        prices[t - 1] = clear_prices(lam, y)
        y = step_wealth(lam, y, rho, x)
        profiles[t - 1], payoffs[t - 1], rates[t - 1], wealth[t] = lam, x, rho, y
        discount[t] = discount[t - 1] * rho
        states.append(nxt)
        hist.past_profiles.append(lam)
        hist.current_state, hist.current_wealth = nxt, y

    return TrajectoryRecord(states, rates, wealth, profiles, prices, payoffs, discount, ruined_at)


def discounted_series(record: TrajectoryRecord) -> np.ndarray:
    """``W'_t = W_t / D_t`` for ``t = 0..T``."""
    if np.any(record.rates <= 0.0):
        t = int(np.argmax(record.rates <= 0.0)) + 1
        raise DiscountingError(f"interest factor is zero at t={t}")
    return record.total / record.discount


def path_rng(seed: int, path: int = 0) -> np.random.Generator:
    """Independent stream for ``path`` under master ``seed``.

    Streams come from ``SeedSequence(seed, spawn_key=(path,))``, so any path
    can be regenerated alone.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(path,)))


def simulate_paths(proc, rules, initial_wealth, horizon, seed, paths, observer_factory=None):
    """Simulate ``paths`` independent trajectories, path ``i`` on ``path_rng(seed, i)``."""
    out = []
    for i in range(paths):
        obs = observer_factory(i) if observer_factory else None
        out.append(simulate(proc, rules, initial_wealth, horizon, path_rng(seed, i), obs))
    return out
