from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from treegibbs.grid import build_rule, dense_grid
from treegibbs.kernels import (
    build_family,
    find_k0,
    four_cycle_min,
    four_cycle_parts,
    moment_matrix,
    solve_exact,
    solve_moment_system,
)
from treegibbs.kernels.moments import A_TARGETS, PSI_POWERS, determinant_exact
from treegibbs.errors import KernelBuildError


@pytest.fixture(scope="module")
def system():
    return solve_moment_system()


def test_first_matrix_entry():
    assert moment_matrix(3, 1, 0)[0][0] == Fraction(1)


def test_all_moment_matrices_nonsingular(system):
    for name, (_, mat) in system.matrices.items():
        assert determinant_exact(mat) != 0, name


def test_solve_exact_small_system():
    x = solve_exact([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]], [Fraction(3), Fraction(5)])
    assert x == [Fraction(4, 5), Fraction(7, 5)]


def test_solve_exact_singular():
    with pytest.raises(KernelBuildError):
        solve_exact([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]], [Fraction(1), Fraction(1)])


def test_known_coefficients(system):
    assert system.coefficients["psi1"] == (Fraction(-175, 16), Fraction(735, 2), Fraction(-1575))
    assert system.coefficients["psi2"] == (Fraction(2079, 4), Fraction(-9702), Fraction(174636, 5))
    assert system.coefficients["psi3"] == (Fraction(-5040), Fraction(28224))
    assert system.coefficients["psi4"] == (Fraction(9072), Fraction(-44352))


def _quad_moment(system, name, power):
    val, _ = integrate.quad(lambda u: system.psi(name, np.array([u]))[0] * u ** power, -0.5, 0.5,
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_psi1_psi2_moments_by_adaptive_quadrature(system):
    for power, target in zip((0, 2, 4), (0.0, 1 / 6, 0.0)):
        assert abs(_quad_moment(system, "psi1", power) - target) < 1e-10
    assert abs(_quad_moment(system, "psi2", 2)) < 1e-10
    assert abs(_quad_moment(system, "psi2", 4) - 1 / 20) < 1e-10


def test_all_achieved_moments_match_targets(system):
    rows = system.achieved_moments()
    assert len(rows) == 10
    for name, power, target, value in rows:
        assert abs(value - float(target)) < 1e-10, (name, power)


def test_g_pair_assignment_chosen_by_residual(system):
    assert system.assignment == "swapped"
    res = system.assignment_residuals
    assert res["swapped"] < 1e-10 < res["printed"]


def test_parity(system):
    u = np.linspace(-0.5, 0.5, 41)
    for name in ("psi1", "psi2"):
        assert np.allclose(system.psi(name, u), system.psi(name, -u), atol=1e-9)
    for name in ("psi3", "psi4"):
        assert np.allclose(system.psi(name, u), -system.psi(name, -u), atol=1e-9)


def test_parts_integrate_to_zero_in_u():
    x, w = np.polynomial.legendre.leggauss(64)
    u, w = (x + 1.0) / 2.0, w / 2.0
    t = np.linspace(0.0, 1.0, 11)
    k1, k2 = four_cycle_parts(t, u, 100)
    assert np.max(np.abs(k1 @ w)) < 1e-10
    assert np.max(np.abs(k2 @ w)) < 1e-10


def test_k0_minimality():
    res = find_k0(1000)
    assert res.k0 == 100
    assert four_cycle_min(res.k0) > 0
    assert four_cycle_min(res.k0 - 1) <= 0
    assert find_k0(1000).k0 == res.k0


def test_k0_not_found_below_bound():
    res = find_k0(2)
    assert res.k0 is None and res.previous_minimum <= 0


def test_large_k_kernel_near_one():
    k = build_family("four_cycle_family", build_rule(20), k=10 ** 4)
    grid = dense_grid()
    dev = np.max(np.abs(k.evaluate(grid, grid) - 1.0))
    assert dev < 0.05


@pytest.mark.slow
def test_parts_shrink_with_k():
    grid = dense_grid(201)
    prev = np.inf
    for k in (64, 128, 256, 512, 1024):
        k1, k2 = four_cycle_parts(grid, grid, k)
        cur = np.min(np.abs(k1) + np.abs(k2))
        assert cur <= prev + 1e-15
        prev = cur


def test_targets_cover_every_psi_power():
    assert set(A_TARGETS) | {"psi3", "psi4"} == set(PSI_POWERS)
