"""Two-investor market where the GRO investor's wealth vanishes.

One asset paying half of last period's total wealth, ``rho = 1``,
``Y_0 = (1, 1)``. Investor 1 plays GRO (which here is always 1/2), investor 2
invests ``1/2 + 1/(2(t-1))`` in period ``t >= 2``. Both invest 1/2 in period
1, so ``Y_1 = (1, 1)``.
"""

from __future__ import annotations

import numpy as np

from .engine import TrajectoryRecord, path_rng, simulate
from .payoff import WealthProportionalPayoff
from .strategies import SCHEDULES, GRORule, ScheduleRule


def market(investor1: str = "gro"):
    proc = WealthProportionalPayoff(0.5, 1.0)
    if investor1 == "gro":
        first = GRORule(proc)
    else:
        first = ScheduleRule(SCHEDULES[investor1], investor1)
    rules = [first, ScheduleRule(SCHEDULES["example6-opponent"], "example6-opponent")]
    return proc, rules, [1.0, 1.0]


def simulate_example(horizon: int, investor1: str = "gro") -> TrajectoryRecord:
    proc, rules, y0 = market(investor1)
    return simulate(proc, rules, y0, horizon, path_rng(0, 0))


def oracle(horizon: int) -> dict[str, np.ndarray]:
    """Closed recursions for ``r^2_t`` and ``W_t``, ``t = 1..horizon``.

    ``r_{t+1} = r_t (1 - a_t)`` with ``a_t = r_t(1-r_t) / (2t^2 + t r_t - r_t^2)``
    and ``W_{t+1} = W_t (1 - r_t / (2t))``, started from ``r_1 = 1/2, W_1 = 2``.
    Index ``k`` of every array is period ``k + 1``.
    """
    r2 = np.empty(horizon)
    w = np.empty(horizon)
    alpha = np.empty(horizon)
    r, wt = 0.5, 2.0
    for t in range(1, horizon + 1):
        a = r * (1.0 - r) / (2.0 * t * t + t * r - r * r)
        r2[t - 1], w[t - 1], alpha[t - 1] = r, wt, a
        wt = wt * (1.0 - r / (2.0 * t))
        r = r * (1.0 - a)
    return {"r2": r2, "W": w, "alpha": alpha}
