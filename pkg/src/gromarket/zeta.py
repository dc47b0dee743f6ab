"""Cash level of the relative growth optimal strategy.

Given total wealth ``c``, interest factor ``rho`` and the conditional payoff
law ``K``, the cash amount ``zeta`` solves

    sum_k p_k * c*rho / (zeta*rho + |x_k|) = 1

when keeping cash is worthwhile (the left side at ``zeta = 0`` exceeds 1),
and is zero otherwise. The root is bracketed in ``(0, c]`` and found by
bisection on the strictly decreasing residual.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass

import numpy as np

from .payoff import DiscreteDistribution

DEFAULT_TOL = 1e-12
ROUNDING_SLACK = 1e-12


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ZetaSolution:
    zeta: float
    in_gamma: bool
    residual: float


def _ratio(num: float, den: float) -> float:
    # 0/0 = 0 and pos/0 = +inf
    if den == 0.0:
        return math.inf if num > 0.0 else 0.0
    return num / den


def cash_worth_keeping(c: float, rho: float, K: DiscreteDistribution) -> float:
    """``sum_k p_k * c*rho / |x_k|`` under the 0/0 = 0, pos/0 = +inf conventions."""
    crho = c * rho
    total = 0.0
    for q, nx in zip(K.probs, K.norms):
        v = _ratio(crho, nx)
        if v == math.inf:
            return math.inf
        total += q * v
    return total


def in_gamma(c: float, rho: float, K: DiscreteDistribution) -> bool:
    return cash_worth_keeping(c, rho, K) > 1.0


def zeta_residual(z: float, c: float, rho: float, K: DiscreteDistribution) -> float:
    crho = c * rho
    zrho = z * rho
    total = 0.0
    for q, nx in zip(K.probs, K.norms):
        den = zrho + nx
        if den > 0.0:
            total += q * crho / den
        elif crho > 0.0:
            return math.inf
    return total - 1.0


def solve_zeta(c: float, rho: float, K: DiscreteDistribution, tol: float = DEFAULT_TOL) -> ZetaSolution:
    if not c > 0.0:
        raise DomainError(f"wealth must be positive, got {c!r}")
    if not tol > 0.0:
        raise DomainError("tolerance must be positive")
    if not in_gamma(c, rho, K):
        return ZetaSolution(0.0, False, zeta_residual(0.0, c, rho, K))

    lo, hi = 0.0, float(c)
    f_lo = zeta_residual(lo, c, rho, K)
    f_hi = zeta_residual(hi, c, rho, K)
    # the residual at z = c is <= 0 in exact arithmetic; allow rounding slack
    assert f_lo > 0.0 and f_hi <= ROUNDING_SLACK, (f_lo, f_hi)
    if f_hi >= 0.0:
        return ZetaSolution(hi, True, f_hi)

    width = tol * max(1.0, c)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = zeta_residual(mid, c, rho, K)
        if f_mid > 0.0:
            lo, f_lo = mid, f_mid
        elif f_mid < 0.0:
            hi, f_hi = mid, f_mid
        else:
            return ZetaSolution(mid, True, 0.0)

    # secant step inside the final bracket
    z = hi
    if math.isfinite(f_lo):
        z = lo + f_lo * (hi - lo) / (f_lo - f_hi)
        z = min(max(z, lo), hi)
    f_z = zeta_residual(z, c, rho, K)
    if abs(f_hi) < abs(f_z):
        z, f_z = hi, f_hi
    return ZetaSolution(z, True, f_z)


def proportions_given_zeta(zeta: float, rho: float, K: DiscreteDistribution) -> np.ndarray:
    """``sum_k p_k * x_k / (zeta*rho + |x_k|)`` with 0/0 = 0."""
    zrho = zeta * rho
    lam = np.zeros(K.dim)
    for x, q, nx in zip(K.payoffs, K.probs, K.norms):
        den = zrho + nx
        if den > 0.0:
            lam += (q / den) * np.asarray(x)
    s = lam.sum()
    if s > 1.0:
        lam /= s
    return lam


@lru_cache(maxsize=4096)
def _gro_cached(c: float, rho: float, K: DiscreteDistribution, tol: float) -> tuple[float, ...]:
    sol = solve_zeta(c, rho, K, tol)
    return tuple(proportions_given_zeta(sol.zeta, rho, K).tolist())


def gro_proportions(c: float, rho: float, K: DiscreteDistribution, tol: float = DEFAULT_TOL) -> np.ndarray:
    if not c > 0.0:
        raise DomainError(f"wealth must be positive, got {c!r}")
    return np.array(_gro_cached(float(c), float(rho), K, float(tol)))
