"""Finite-support payoff laws and the processes that generate them.

Every conditional law used by the market is a :class:`DiscreteDistribution`,
so every integral against it is an exact finite sum.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, NamedTuple, Sequence

import numpy as np

PROB_TOL = 1e-12


class ConfigError(ValueError):
    """Raised for malformed distributions, processes or experiment configs."""


class IndeterminateExpectation(ArithmeticError):
    """Raised when an expectation mixes +inf and -inf contributions."""


class DiscountingError(ArithmeticError):
    """Raised when discounting meets a zero interest factor."""


def _check_probs(probs: Sequence[float], what: str) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.size == 0:
        raise ConfigError(f"{what}: atom list must be non-empty")
    if not np.all(np.isfinite(p)) or np.any(p <= 0.0):
        raise ConfigError(f"{what}: probabilities must be strictly positive")
    total = math.fsum(p)
    if abs(total - 1.0) > PROB_TOL:
        raise ConfigError(f"{what}: probabilities must sum to 1 (got {total!r})")
    return p / total


def _check_payoff(x: Sequence[float], what: str) -> tuple[float, ...]:
    v = tuple(float(c) for c in np.atleast_1d(np.asarray(x, dtype=float)))
    if not v:
        raise ConfigError(f"{what}: payoff vector must have at least one component")
    if any(not math.isfinite(c) or c < 0.0 for c in v):
        raise ConfigError(f"{what}: payoff components must be finite and non-negative")
    return v


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finite-support law over payoff vectors in R_+^N.

    ``payoffs`` is a tuple of equal-length tuples, ``probs`` the matching
    probabilities. Use :meth:`from_atoms` to build one from ``(payoff, prob)``
    pairs.
    """

    payoffs: tuple[tuple[float, ...], ...]
    probs: tuple[float, ...]
    norms: tuple[float, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.payoffs) != len(self.probs):
            raise ConfigError("payoffs and probs must have the same length")
        payoffs = tuple(_check_payoff(x, "distribution") for x in self.payoffs)
        if len({len(x) for x in payoffs}) > 1:
            raise ConfigError("all payoff vectors must have the same dimension")
        probs = tuple(float(q) for q in _check_probs(self.probs, "distribution"))
        object.__setattr__(self, "payoffs", payoffs)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "norms", tuple(math.fsum(x) for x in payoffs))

    @classmethod
    def from_atoms(cls, atoms: Iterable[tuple[Sequence[float], float]]) -> "DiscreteDistribution":
        atoms = list(atoms)
        return cls(tuple(tuple(np.atleast_1d(x).tolist()) for x, _ in atoms),
                   tuple(q for _, q in atoms))

    @classmethod
    def point_mass(cls, x: Sequence[float]) -> "DiscreteDistribution":
        return cls.from_atoms([(x, 1.0)])

    @property
    def dim(self) -> int:
        return len(self.payoffs[0])

    def __len__(self):
        return len(self.probs)

    def __iter__(self):
        return iter(zip(self.payoffs, self.probs))

    def __eq__(self, other):
        if not isinstance(other, DiscreteDistribution):
            return NotImplemented
        return self.payoffs == other.payoffs and self.probs == other.probs

    def __hash__(self):
        return hash((self.payoffs, self.probs))

    def payoff_array(self) -> np.ndarray:
        return np.array(self.payoffs, dtype=float)

    def scaled(self, k: float) -> "DiscreteDistribution":
        """Law of ``k * X``."""
        return DiscreteDistribution(tuple(tuple(k * c for c in x) for x in self.payoffs),
                                    self.probs)

    def merged(self) -> "DiscreteDistribution":
        """Same law with identical payoff vectors collapsed into one atom."""
        acc: dict[tuple[float, ...], list[float]] = {}
        for x, q in self:
            acc.setdefault(x, []).append(q)
        return DiscreteDistribution(tuple(acc), tuple(math.fsum(v) for v in acc.values()))

    def is_constant(self) -> bool:
        return len(set(self.payoffs)) == 1


def expect(dist: DiscreteDistribution, phi: Callable[[np.ndarray], float]) -> float:
    """Exact expectation ``sum_atoms prob * phi(payoff)``.

    Infinite values are allowed; any ``+inf`` term makes the result ``+inf``
    (likewise ``-inf``), but both at once is indeterminate.
    """
    terms = []
    pos_inf = neg_inf = False
    for x, q in dist:
        v = float(phi(np.asarray(x)))
        if math.isnan(v):
            raise IndeterminateExpectation("phi returned NaN")
        if v == math.inf:
            pos_inf = True
        elif v == -math.inf:
            neg_inf = True
        else:
            terms.append(q * v)
    if pos_inf and neg_inf:
        raise IndeterminateExpectation("expectation mixes +inf and -inf")
    if pos_inf:
        return math.inf
    if neg_inf:
        return -math.inf
    return math.fsum(terms)


class Transition(NamedTuple):
    next_state: Hashable
    payoff: tuple[float, ...]
    prob: float


def draw_index(cumulative: Sequence[float], rng: np.random.Generator) -> int:
    u = rng.random()
    return min(bisect.bisect_right(cumulative, u), len(cumulative) - 1)


class PayoffProcess:
    """Finite-state Markov generator of (state, payoff, interest factor).

    ``rates[s]`` is the gross interest factor applied over the period that
    *starts* in state ``s``, so it is known one period in advance.
    Payoff and next state are drawn jointly from ``transitions[s]``.
    """

    def __init__(self, transitions, rates, initial_state):
        if not transitions:
            raise ConfigError("process must have at least one state")
        self._trans: dict[Hashable, tuple[Transition, ...]] = {}
        self._cum: dict[Hashable, tuple[float, ...]] = {}
        self._laws: dict[Hashable, DiscreteDistribution] = {}
        self.rates: dict[Hashable, float] = {}
        dims = set()
        for s, atoms in transitions.items():
            atoms = [Transition(ns, _check_payoff(x, f"state {s!r}"), float(q))
                     for ns, x, q in atoms]
            probs = _check_probs([a.prob for a in atoms], f"state {s!r}")
            atoms = [a._replace(prob=float(q)) for a, q in zip(atoms, probs)]
            dims.update(len(a.payoff) for a in atoms)
            self._trans[s] = tuple(atoms)
            self._cum[s] = tuple(np.cumsum(probs).tolist())
        if len(dims) != 1:
            raise ConfigError("all payoff vectors must have the same dimension")
        self.dim = dims.pop()
        for s in self._trans:
            if s not in rates:
                raise ConfigError(f"missing rate for state {s!r}")
            rho = float(rates[s])
            if not math.isfinite(rho) or rho < 0.0:
                raise ConfigError(f"rate for state {s!r} must be finite and non-negative")
            self.rates[s] = rho
            for a in self._trans[s]:
                if a.next_state not in self._trans:
                    raise ConfigError(f"transition from {s!r} to unknown state {a.next_state!r}")
                if rho + sum(a.payoff) <= 0.0:
                    raise ConfigError(
                        f"state {s!r}: rate + |payoff| must be positive for every atom")
        if initial_state not in self._trans:
            raise ConfigError(f"unknown initial state {initial_state!r}")
        self.initial_state = initial_state

    @classmethod
    def iid(cls, dist: DiscreteDistribution, rate: float = 1.0, label="s") -> "PayoffProcess":
        return cls({label: [(label, x, q) for x, q in dist]}, {label: rate}, label)

    @property
    def states(self) -> tuple:
        return tuple(self._trans)

    def _get(self, table, state):
        try:
            return table[state]
        except KeyError:
            raise ConfigError(f"unknown state {state!r}") from None

    def rate(self, state) -> float:
        return self._get(self.rates, state)

    def transitions(self, state, wealth: float | None = None) -> tuple[Transition, ...]:
        return self._get(self._trans, state)

    def law(self, state, wealth: float | None = None) -> DiscreteDistribution:
        """Conditional law of next period's payoff given the current state."""
        if state not in self._laws:
            atoms = self._get(self._trans, state)
            self._laws[state] = DiscreteDistribution(
                tuple(a.payoff for a in atoms), tuple(a.prob for a in atoms)).merged()
        return self._laws[state]

    def sample(self, state, rng: np.random.Generator, wealth: float | None = None):
        atoms = self._get(self._trans, state)
        a = atoms[draw_index(self._cum[state], rng)]
        return a.next_state, a.payoff

    def is_iid(self) -> bool:
        return len(self._trans) == 1

    def to_dict(self) -> dict:
        return {
            "kind": "markov",
            "initial_state": self.initial_state,
            "rates": {str(s): r for s, r in self.rates.items()},
            "transitions": {
                str(s): [{"next": a.next_state, "payoff": list(a.payoff), "prob": a.prob}
                         for a in atoms]
                for s, atoms in self._trans.items()
            },
        }


def conditional_distribution(proc, state, wealth: float | None = None) -> DiscreteDistribution:
    return proc.law(state, wealth)


def sample_step(proc, state, rng: np.random.Generator, wealth: float | None = None):
    return proc.sample(state, rng, wealth)


class WealthProportionalPayoff:
    """Deterministic single-state market paying ``fraction * W * weights``.

    Next period's payoff is a fixed fraction of current total wealth, split
    across assets by ``weights``. The law is a point mass, so it is known at
    the time proportions are chosen.
    """

    def __init__(self, fraction: float, rate: float = 1.0, weights=(1.0,)):
        w = np.asarray(weights, dtype=float)
        if fraction <= 0 or rate < 0 or np.any(w < 0) or not math.isclose(w.sum(), 1.0):
            raise ConfigError("invalid wealth-proportional payoff parameters")
        self.fraction = float(fraction)
        self.weights = tuple(w.tolist())
        self.dim = len(self.weights)
        self.initial_state = "s"
        self.rates = {"s": float(rate)}

    @property
    def states(self):
        return ("s",)

    def rate(self, state) -> float:
        if state != "s":
            raise ConfigError(f"unknown state {state!r}")
        return self.rates["s"]

    def _payoff(self, wealth):
        if wealth is None:
            raise ConfigError("wealth-proportional payoff needs the current total wealth")
        return tuple(self.fraction * wealth * c for c in self.weights)

    def transitions(self, state, wealth=None):
        self.rate(state)
        return (Transition("s", self._payoff(wealth), 1.0),)

    def law(self, state, wealth=None):
        self.rate(state)
        return DiscreteDistribution.point_mass(self._payoff(wealth))

    def sample(self, state, rng, wealth=None):
        return "s", self._payoff(wealth)

    def is_iid(self) -> bool:
        return False

    def to_dict(self) -> dict:
        return {"kind": "wealth_proportional", "fraction": self.fraction,
                "rate": self.rates["s"], "weights": list(self.weights)}


class DiscountedProcess:
    """The market ``(X_t / D_t, 1)`` built on top of a base process.

    States are pairs ``(base_state, D_{t-1})``; drawing from the base with the
    same generator reproduces the base path atom for atom.
    """

    def __init__(self, base):
        self.base = base
        self.dim = base.dim
        self.initial_state = (base.initial_state, 1.0)

    def rate(self, state) -> float:
        return 1.0

    def _next_discount(self, state):
        s, d = state
        rho = self.base.rate(s)
        if rho <= 0.0:
            raise DiscountingError(f"zero interest factor in state {s!r}")
        return d * rho

    def transitions(self, state, wealth=None):
        d_next = self._next_discount(state)
        base_wealth = None if wealth is None else wealth * state[1]
        return tuple(Transition((a.next_state, d_next), tuple(c / d_next for c in a.payoff), a.prob)
                     for a in self.base.transitions(state[0], base_wealth))

    def law(self, state, wealth=None):
        d_next = self._next_discount(state)
        base_wealth = None if wealth is None else wealth * state[1]
        return self.base.law(state[0], base_wealth).scaled(1.0 / d_next)

    def sample(self, state, rng, wealth=None):
        d_next = self._next_discount(state)
        base_wealth = None if wealth is None else wealth * state[1]
        s, x = self.base.sample(state[0], rng, base_wealth)
        return (s, d_next), tuple(c / d_next for c in x)


def process_from_dict(cfg: dict):
    """Build a payoff process from its JSON config record."""
    try:
        kind = cfg.get("kind", "markov")
        if kind == "iid":
            dist = DiscreteDistribution.from_atoms((a["payoff"], a["prob"]) for a in cfg["atoms"])
            return PayoffProcess.iid(dist, float(cfg.get("rate", 1.0)))
        if kind == "markov":
            trans = {s: [(a["next"], a["payoff"], a["prob"]) for a in atoms]
                     for s, atoms in cfg["transitions"].items()}
            return PayoffProcess(trans, cfg["rates"], cfg["initial_state"])
        if kind == "wealth_proportional":
            return WealthProportionalPayoff(cfg["fraction"], cfg.get("rate", 1.0),
                                            cfg.get("weights", (1.0,)))
    except (KeyError, TypeError) as e:
        raise ConfigError(f"process: missing or malformed field {e}") from None
    raise ConfigError(f"process: unknown kind {kind!r}")


def parse_distribution_literal(text: str) -> DiscreteDistribution:
    """Parse ``payoff:prob`` comma lists, ``/`` separating vector components.

    >>> parse_distribution_literal("1/0:0.5,0/1:0.5").payoffs
    ((1.0, 0.0), (0.0, 1.0))
    """
    atoms = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            payoff, prob = part.split(":")
            atoms.append(([float(c) for c in payoff.split("/")], float(prob)))
        except ValueError:
            raise ConfigError(f"bad distribution atom {part!r}; expected payoff:prob") from None
    if not atoms:
        raise ConfigError("empty distribution literal")
    return DiscreteDistribution.from_atoms(atoms)
