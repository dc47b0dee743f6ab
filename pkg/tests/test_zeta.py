import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gromarket.payoff import DiscreteDistribution
from gromarket.zeta import (DomainError, gro_proportions, in_gamma, solve_zeta, zeta_residual)

TWO_ATOM = DiscreteDistribution.from_atoms([([0.5], 0.5), ([2.0], 0.5)])
POINT2 = DiscreteDistribution.point_mass([2.0])


def quadratic_root():
    # 0.5/(z+0.5) + 0.5/(z+2) = 1  <=>  2z^2 + 3z - 0.5 = 0
    a, b, c = 2.0, 3.0, -0.5
    return (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)


def brute_force_root(c, rho, K, n=200_001):
    """Grid scan for the sign change of the residual, then a fine local grid."""
    grid = np.linspace(0, c, n)[1:]
    vals = np.array([zeta_residual(z, c, rho, K) for z in grid])
    k = int(np.argmax(vals <= 0))
    lo = grid[k - 1] if k else 0.0
    fine = np.linspace(lo, grid[k], 2001)
    fv = np.array([zeta_residual(z, c, rho, K) for z in fine])
    return fine[int(np.argmax(fv <= 0))]


def test_in_gamma_examples():
    assert not in_gamma(3.0, 0.0, TWO_ATOM)
    assert in_gamma(5.0, 1.0, POINT2)
    assert not in_gamma(1.0, 1.0, POINT2)
    with_zero = DiscreteDistribution.from_atoms([([0.0], 0.1), ([5.0], 0.9)])
    assert in_gamma(1.0, 1.0, with_zero)


def test_in_gamma_boundary_is_excluded():
    # expectation exactly 1
    assert not in_gamma(2.0, 1.0, POINT2)
    assert solve_zeta(2.0, 1.0, POINT2).zeta == 0.0


def test_solve_zeta_examples():
    assert solve_zeta(5.0, 1.0, POINT2).zeta == pytest.approx(3.0, abs=1e-12)
    w = 7.3
    half = DiscreteDistribution.point_mass([w / 2])
    assert solve_zeta(w, 1.0, half).zeta == pytest.approx(w / 2, abs=1e-11)
    assert solve_zeta(4.0, 0.0, TWO_ATOM).zeta == 0.0
    assert solve_zeta(1.0, 1.0, TWO_ATOM).zeta == pytest.approx(quadratic_root(), abs=1e-12)


def test_quadratic_closed_form_against_brute_force():
    assert brute_force_root(1.0, 1.0, TWO_ATOM) == pytest.approx(quadratic_root(), abs=1e-8)
    assert quadratic_root() == pytest.approx(0.151388, abs=1e-6)


def test_solve_zeta_domain():
    with pytest.raises(DomainError):
        solve_zeta(0.0, 1.0, POINT2)
    with pytest.raises(DomainError):
        gro_proportions(-1.0, 1.0, POINT2)


def test_gro_proportions_examples():
    assert gro_proportions(5.0, 1.0, POINT2) == pytest.approx([0.4], abs=1e-12)
    w = 3.0
    assert gro_proportions(w, 1.0, DiscreteDistribution.point_mass([w / 2])) == \
        pytest.approx([0.5], abs=1e-12)
    K = DiscreteDistribution.from_atoms([([1.0, 0.0], 0.5), ([0.0, 1.0], 0.5)])
    assert gro_proportions(2.0, 0.0, K) == pytest.approx([0.5, 0.5], abs=1e-15)


def test_zero_rate_gives_expected_relative_payoffs():
    K = DiscreteDistribution.from_atoms([([1.0, 3.0], 0.25), ([2.0, 0.0], 0.75)])
    lam = gro_proportions(1.0, 0.0, K)
    assert lam == pytest.approx([0.25 * 0.25 + 0.75, 0.25 * 0.75], abs=1e-15)


def test_zero_payoff_atoms_contribute_nothing_to_proportions():
    K = DiscreteDistribution.from_atoms([([0.0, 0.0], 0.2), ([1.0, 1.0], 0.8)])
    sol = solve_zeta(1.0, 1.0, K)
    assert sol.in_gamma and sol.zeta > 0
    lam = gro_proportions(1.0, 1.0, K)
    expect_lam = 0.8 * np.array([1.0, 1.0]) / (sol.zeta + 2.0)
    assert lam == pytest.approx(expect_lam, abs=1e-12)


atoms = st.lists(st.tuples(st.floats(0.05, 5), st.floats(0.05, 1)), min_size=1, max_size=5)


def make(atom_list):
    total = sum(q for _, q in atom_list)
    return DiscreteDistribution.from_atoms([([x], q / total) for x, q in atom_list])


@settings(max_examples=200, deadline=None)
@given(atoms, st.floats(0.05, 20), st.floats(0.1, 3))
def test_root_brackets_and_cash_identity(atom_list, c, rho):
    K = make(atom_list)
    sol = solve_zeta(c, rho, K)
    lam = gro_proportions(c, rho, K)
    assert 0 <= lam.sum() <= 1
    assert lam.sum() == pytest.approx(1 - sol.zeta / c, abs=1e-11)
    if sol.in_gamma:
        assert 0 < sol.zeta <= c
        assert zeta_residual(sol.zeta * 0.999, c, rho, K) > 0
        assert abs(sol.residual) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(atoms, st.floats(0.1, 3), st.integers(0, 2**31))
def test_zeta_monotone_in_wealth(atom_list, rho, seed):
    K = make(atom_list)
    cs = np.sort(np.random.default_rng(seed).uniform(0.01, 30, 100))
    z = [solve_zeta(float(c), rho, K).zeta for c in cs]
    assert all(b >= a - 1e-10 for a, b in zip(z, z[1:]))


def test_point_mass_closed_form_random():
    rng = np.random.default_rng(3)
    for _ in range(100):
        c, x = rng.uniform(0.01, 10, 2)
        z = solve_zeta(c, 1.0, DiscreteDistribution.point_mass([x])).zeta
        assert z == pytest.approx(max(c - x, 0.0), abs=10 * 1e-12 * max(1, c))


@settings(max_examples=100, deadline=None)
@given(atoms, st.floats(0.05, 20), st.floats(0.1, 3), st.floats(0.01, 100))
def test_joint_scaling_invariance(atom_list, c, rho, k):
    K = make(atom_list)
    a = gro_proportions(c, rho, K)
    b = gro_proportions(k * c, rho, K.scaled(k))
    assert b == pytest.approx(a, abs=1e-10)
    assert solve_zeta(k * c, rho, K.scaled(k)).zeta == pytest.approx(
        k * solve_zeta(c, rho, K).zeta, rel=1e-9, abs=1e-10 * k)
