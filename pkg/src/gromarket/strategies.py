"""Strategy rules: maps from market history to investment proportions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

from .payoff import ConfigError
from .zeta import DEFAULT_TOL, DomainError, gro_proportions

SUM_SLACK = 1e-12


class RuinError(ArithmeticError):
    """The GRO rule was asked for proportions with zero total wealth."""


def as_proportions(v, n: int | None = None) -> np.ndarray:
    """Validate one investor's proportion vector, clamping tiny sum overshoot."""
    lam = np.array(v, dtype=float).reshape(-1)
    if n is not None and lam.size != n:
        raise ConfigError(f"proportion vector has {lam.size} components, expected {n}")
    if not np.all(np.isfinite(lam)) or np.any(lam < 0.0) or np.any(lam > 1.0):
        raise ConfigError(f"proportions must lie in [0, 1]: {lam.tolist()}")
    s = lam.sum()
    if s > 1.0 + SUM_SLACK:
        raise ConfigError(f"proportions sum to {s!r} > 1")
    if s > 1.0:
        lam /= s
    return lam


def as_profile(rows, n: int | None = None) -> np.ndarray:
    rows = [as_proportions(r, n) for r in rows]
    return np.vstack(rows)


@dataclass
class History:
    """What every investor sees before choosing proportions for period ``t``.

    ``past_profiles[s-1]`` is the profile played in period ``s``. The engine
    appends to it in place; rules must treat it as read-only.
    """

    initial_wealth: np.ndarray
    past_profiles: list = field(default_factory=list)
    current_state: Hashable = None
    current_wealth: np.ndarray = None

    @property
    def t(self) -> int:
        return len(self.past_profiles)

    @property
    def total_wealth(self) -> float:
        return math.fsum(self.current_wealth)


class StrategyRule:
    kind = "abstract"

    def __call__(self, t: int, history: History) -> np.ndarray:
        raise NotImplementedError


@dataclass
class GRORule(StrategyRule):
    """Relative growth optimal proportions for total wealth and the current state.

    ``fault`` scales the output down; it exists only to check that audits
    catch a miscomputed strategy.
    """

    proc: object
    tol: float = DEFAULT_TOL
    fault: float = 0.0
    kind = "gro"

    def proportions(self, state, total_wealth: float) -> np.ndarray:
        if not total_wealth > 0.0:
            raise RuinError(f"total wealth {total_wealth!r} is not positive")
        rho = self.proc.rate(state)
        K = self.proc.law(state, total_wealth)
        try:
            lam = gro_proportions(total_wealth, rho, K, self.tol)
        except DomainError as e:
            raise RuinError(str(e)) from None
        if self.fault:
            lam = lam * (1.0 - self.fault)
        return lam

    def __call__(self, t, history):
        return self.proportions(history.current_state, history.total_wealth)


@dataclass
class ConstantRule(StrategyRule):
    weights: Sequence[float]
    kind = "constant"

    def __post_init__(self):
        self.weights = as_proportions(self.weights)

    def __call__(self, t, history):
        return self.weights


@dataclass
class ScheduleRule(StrategyRule):
    """Deterministic schedule ``t -> proportions``, ignoring history."""

    values: Callable[[int], Sequence[float]]
    name: str = ""
    kind = "schedule"

    def __call__(self, t, history):
        return as_proportions(self.values(t))


@dataclass
class ScriptedRule(StrategyRule):
    """Table lookup on ``(t, state)``, then ``t``, then ``state``, then ``default``."""

    table: dict
    default: Sequence[float] | None = None
    kind = "scripted"

    def __call__(self, t, history):
        s = history.current_state
        for key in ((t, s), t, s):
            try:
                v = self.table[key]
            except (KeyError, TypeError):
                continue
            return as_proportions(v)
        if self.default is None:
            raise ConfigError(f"scripted rule has no entry for t={t}, state={s!r}")
        return as_proportions(self.default)


@dataclass
class ShiftedGRORule(StrategyRule):
    """GRO proportions moved by ``eps`` along a fixed unit direction.

    The sign of the move is chosen per step so the result stays admissible;
    the Euclidean distance from the GRO vector is exactly ``eps``.
    """

    proc: object
    eps: float
    direction: Sequence[float] | None = None
    tol: float = DEFAULT_TOL
    kind = "gro_shift"

    def __post_init__(self):
        self._gro = GRORule(self.proc, self.tol)
        d = np.ones(self.proc.dim) if self.direction is None else np.asarray(self.direction, float)
        self._dir = d / np.linalg.norm(d)

    def __call__(self, t, history):
        lam = self._gro(t, history)
        for sign in (1.0, -1.0):
            cand = lam + sign * self.eps * self._dir
            if np.all(cand >= 0.0) and np.all(cand <= 1.0) and cand.sum() <= 1.0:
                return cand
        raise ConfigError(f"cannot shift GRO proportions {lam.tolist()} by {self.eps}")


def representative(profile, relative_wealth, excluded: int) -> np.ndarray:
    """Wealth-weighted average of every row except ``excluded``.

    Returns the zero vector when the excluded investor holds all the wealth.
    """
    profile = np.asarray(profile, dtype=float)
    r = np.asarray(relative_wealth, dtype=float)
    w = r.copy()
    w[excluded] = 0.0
    if r[excluded] >= 1.0 or w.sum() <= 0.0:
        return np.zeros(profile.shape[1])
    lam = (w / w.sum()) @ profile
    return np.clip(lam, 0.0, 1.0)


def example6_opponent(t: int) -> list[float]:
    # 1/2 + 1/(2(t-1)) from t = 2 on; t = 1 is left free and set to 1/2
    if t <= 1:
        return [0.5]
    return [0.5 + 0.5 / (t - 1)]


SCHEDULES: dict[str, Callable[[int], list[float]]] = {
    "example6-opponent": example6_opponent,
    "half": lambda t: [0.5],
    "zero": lambda t: [0.0],
}


def schedule_rule(values, name: str = "") -> ScheduleRule:
    return ScheduleRule(values, name)


def gro_rule(proc, tol: float = DEFAULT_TOL) -> GRORule:
    return GRORule(proc, tol)


def rule_from_dict(cfg: dict, proc) -> StrategyRule:
    """Build a rule from its tagged config record."""
    kind = cfg.get("kind")
    if kind == "gro":
        return GRORule(proc, float(cfg.get("tol", DEFAULT_TOL)), float(cfg.get("fault", 0.0)))
    if kind == "constant":
        return ConstantRule(cfg["weights"])
    if kind == "schedule":
        if "formula" in cfg:
            name = cfg["formula"]
            if name == "zero":
                return ScheduleRule(lambda t: [0.0] * proc.dim, name)
            if name not in SCHEDULES:
                raise ConfigError(f"unknown schedule formula {name!r}")
            return ScheduleRule(SCHEDULES[name], name)
        table = {int(k): v for k, v in cfg["table"].items()}
        last = max(table)
        return ScheduleRule(lambda t: table.get(t, table[last]), "table")
    if kind == "scripted":
        table = {}
        for entry in cfg["table"]:
            key = (entry["t"], entry["state"]) if "state" in entry and "t" in entry else \
                entry.get("t", entry.get("state"))
            table[key] = entry["weights"]
        return ScriptedRule(table, cfg.get("default"))
    if kind == "gro_shift":
        return ShiftedGRORule(proc, float(cfg["eps"]), cfg.get("direction"))
    raise ConfigError(f"unknown strategy kind {kind!r}")
