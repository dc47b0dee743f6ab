"""Asset market game with short-lived assets and a bank account.

Builds the relative growth optimal (GRO) strategy, simulates multi-investor
wealth dynamics under market-clearing prices, and checks the strategy's
martingale, dominance and growth properties exactly on finite-support laws.
"""

from .engine import TrajectoryRecord, clear_prices, discounted_series, path_rng, simulate, step_wealth
from .payoff import (ConfigError, DiscountedProcess, DiscreteDistribution, PayoffProcess,
                     WealthProportionalPayoff, conditional_distribution, expect, sample_step)
from .strategies import (ConstantRule, GRORule, History, ScheduleRule, ScriptedRule,
                         ShiftedGRORule, gro_rule, representative, schedule_rule)
from .zeta import ZetaSolution, gro_proportions, in_gamma, solve_zeta

__all__ = [
    "ConfigError", "ConstantRule", "DiscountedProcess", "DiscreteDistribution", "GRORule",
    "History", "PayoffProcess", "ScheduleRule", "ScriptedRule", "ShiftedGRORule",
    "TrajectoryRecord", "WealthProportionalPayoff", "ZetaSolution", "clear_prices",
    "conditional_distribution", "discounted_series", "expect", "gro_proportions", "gro_rule",
    "in_gamma", "path_rng", "representative", "sample_step", "schedule_rule", "simulate",
    "solve_zeta", "step_wealth",
]
