"""Moment-matched polynomials and the four-solution kernel family.

Four small linear systems fix the coefficients of

    psi1(u) = a11 + a12 u^2 + a13 u^4        psi2(u) = a21 u^2 + a22 u^4 + a23 u^6
    psi3(u) = b11 u + b12 u^3                psi4(u) = b21 u^3 + b22 u^5

by prescribing moments over [-1/2, 1/2].  They are solved exactly over the
rationals.  The kernel is 1 + K1 + K2 with

    K1 = psi1(u) (root_k(20 t^4 + 3/4) - 1) + psi2(u) (root_k(6 t^2 + 1/2) - 1)
    K2 = psi3(u) (root_k(t^3 + 1) - 1)      + psi4(u) (root_k(t^5 + 1) - 1)

evaluated at (t - 1/2, u - 1/2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .. import _backend
from ..errors import KernelBuildError
from ..grid import DENSE_POINTS, QuadratureRule, build_rule, dense_grid
from .base import Kernel, assemble
from .catalog import ClosedFormPair

# (matrix (n, m, p), moment powers, right-hand side) for the even polynomials
A_TARGETS = {
    "psi1": ((3, 1, 0), (0, 2, 4), (Fraction(0), Fraction(1, 6), Fraction(0))),
    "psi2": ((3, 3, 1), (0, 2, 4), (Fraction(0), Fraction(0), Fraction(1, 20))),
}
B_MATRICES = {"psi3": (2, 5, 2), "psi4": (2, 7, 3)}
B_POWERS = (3, 5)
# right-hand sides for the odd polynomials, moments against (u^3, u^5)
B_ASSIGNMENTS = {
    "printed": {"psi3": (Fraction(1), Fraction(0)), "psi4": (Fraction(0), Fraction(1))},
    "swapped": {"psi3": (Fraction(0), Fraction(1)), "psi4": (Fraction(1), Fraction(0))},
}
# polynomial exponents of each psi
PSI_POWERS = {"psi1": (0, 2, 4), "psi2": (2, 4, 6), "psi3": (1, 3), "psi4": (3, 5)}


def moment_matrix(n: int, m: int, p: int) -> list:
    """A_n^(m,p)[i][j] = 1 / ((m + 2(i-1) + 2(j-1)) * 4^(p+i+j-2)), exact."""
    return [
        [Fraction(1, (m + 2 * (i - 1) + 2 * (j - 1)) * 4 ** (p + i + j - 2)) for j in range(1, n + 1)]
        for i in range(1, n + 1)
    ]


def solve_exact(matrix, rhs) -> list:
    """Gaussian elimination with partial pivoting over the rationals.

    Raises
    ------
    KernelBuildError
        If the matrix is singular.
    """
    n = len(matrix)
    a = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise KernelBuildError(f"singular {n}x{n} moment matrix (column {col})")
        a[col], a[piv] = a[piv], a[col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            if factor:
                for c in range(col, n + 1):
                    a[r][c] -= factor * a[col][c]
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        s = a[r][n] - sum(a[r][c] * x[c] for c in range(r + 1, n))
        x[r] = s / a[r][r]
    return x


def determinant_exact(matrix) -> Fraction:
    n = len(matrix)
    a = [[Fraction(x) for x in row] for row in matrix]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] -= factor * a[col][c]
    return det


def centered_moment(power: int) -> Fraction:
    """Integral of u^power over [-1/2, 1/2]."""
    if power % 2:
        return Fraction(0)
    return Fraction(1, 2 ** power * (power + 1))


@dataclass(frozen=True)
class MomentSystem:
    matrices: dict
    coefficients: dict  # name -> tuple of Fractions, ordered as PSI_POWERS
    targets: dict  # name -> tuple of (power, Fraction)
    assignment: str
    assignment_residuals: dict = field(default_factory=dict)

    def psi(self, name: str, u) -> np.ndarray:
        u = np.asarray(u, float)
        out = np.zeros_like(u)
        for c, p in zip(self.coefficients[name], PSI_POWERS[name]):
            out = out + float(c) * u ** p
        return out

    def psi_all(self, u) -> np.ndarray:
        return np.vstack([self.psi(nm, u) for nm in ("psi1", "psi2", "psi3", "psi4")])

    def exact_moment(self, name: str, power: int) -> Fraction:
        return sum((c * centered_moment(p + power) for c, p in zip(self.coefficients[name], PSI_POWERS[name])),
                   Fraction(0))

    def achieved_moments(self, nodes: int = 32) -> list:
        """(name, power, target, quadrature value) for every prescribed moment."""
        x, w = np.polynomial.legendre.leggauss(nodes)
        u, w = 0.5 * x, 0.5 * w
        rows = []
        for name, tgt in self.targets.items():
            vals = self.psi(name, u)
            for power, value in tgt:
                rows.append((name, power, value, float(np.dot(w, vals * u ** power))))
        return rows

    def to_dict(self) -> dict:
        return {
            "assignment": self.assignment,
            "coefficients": {k: [str(c) for c in v] for k, v in self.coefficients.items()},
            "targets": {k: [[p, str(v)] for p, v in t] for k, t in self.targets.items()},
            "assignment_residuals": self.assignment_residuals,
        }


def _solve(assignment: str) -> tuple:
    matrices, coeffs, targets = {}, {}, {}
    for name, (nmp, powers, rhs) in A_TARGETS.items():
        mat = moment_matrix(*nmp)
        matrices[name] = (nmp, mat)
        coeffs[name] = tuple(solve_exact(mat, rhs))
        targets[name] = tuple(zip(powers, rhs))
    for name, nmp in B_MATRICES.items():
        mat = moment_matrix(*nmp)
        rhs = B_ASSIGNMENTS[assignment][name]
        matrices[name] = (nmp, mat)
        coeffs[name] = tuple(solve_exact(mat, rhs))
        targets[name] = tuple(zip(B_POWERS, rhs))
    return matrices, coeffs, targets


def _profiles(t1, k: int) -> np.ndarray:
    """root_k(x) - 1 for the four profile arguments, paired with psi1..psi4."""
    t1 = np.asarray(t1, float)
    args = (20.0 * t1 ** 4 + 0.75, 6.0 * t1 ** 2 + 0.5, t1 ** 3 + 1.0, t1 ** 5 + 1.0)
    return np.vstack([np.expm1(np.log(a) / k) for a in args])


def _factors(system: MomentSystem, k: int):
    def left(t):
        t = np.asarray(t, float)
        return np.vstack([np.ones_like(t), _profiles(t - 0.5, k)])

    def right(u):
        u = np.asarray(u, float)
        return np.vstack([np.ones_like(u), system.psi_all(u - 0.5)])

    return left, right


def _g_pair_residual(system: MomentSystem, k: int = 3, nodes: int = 64) -> float:
    """sup |H_k g1 - g2|, |H_k g2 - g1| for the odd-profile pair; exact Gauss."""
    rule = build_rule(nodes)
    left, right = _factors(system, k)
    kw = (left(rule.nodes).T @ right(rule.nodes)) * rule.weights
    t1 = rule.nodes - 0.5
    g1, g2 = (t1 ** 3 + 1) ** (1.0 / k), (t1 ** 5 + 1) ** (1.0 / k)
    return float(max(np.max(np.abs(kw @ g1 ** k - g2)), np.max(np.abs(kw @ g2 ** k - g1))))


@lru_cache(maxsize=None)
def solve_moment_system(assignment: str = "auto") -> MomentSystem:
    """Solve the four moment systems.

    ``assignment`` picks the right-hand sides of the two odd systems.
    ``"auto"`` tries each candidate and keeps the one under which
    (root_k(t^3+1), root_k(t^5+1)) is a 2-cycle, checked by quadrature.
    """
    for name, (nmp, _, _) in A_TARGETS.items():
        if determinant_exact(moment_matrix(*nmp)) == 0:
            raise KernelBuildError(f"A{nmp} is singular")
    if assignment != "auto":
        if assignment not in B_ASSIGNMENTS:
            raise ValueError(f"unknown assignment {assignment!r}")
        return MomentSystem(*_solve(assignment), assignment=assignment)
    residuals, systems = {}, {}
    for cand in B_ASSIGNMENTS:
        systems[cand] = MomentSystem(*_solve(cand), assignment=cand)
        residuals[cand] = _g_pair_residual(systems[cand])
    best = min(residuals, key=residuals.get)
    if residuals[best] > 1e-10:
        raise KernelBuildError(f"no odd-moment assignment yields the 2-cycle: {residuals}")
    s = systems[best]
    return MomentSystem(s.matrices, s.coefficients, s.targets, best, residuals)


def four_cycle_parts(t, u, k: int, system: Optional[MomentSystem] = None) -> tuple:
    """(K1, K2) evaluated at the shifted arguments (t - 1/2, u - 1/2)."""
    system = system or solve_moment_system()
    prof = _profiles(np.asarray(t, float) - 0.5, k)
    psi = system.psi_all(np.asarray(u, float) - 0.5)
    return prof[:2].T @ psi[:2], prof[2:].T @ psi[2:]


def build_four_cycle_kernel(k: int, rule: Optional[QuadratureRule] = None,
                            system: Optional[MomentSystem] = None) -> Kernel:
    """K~(t - 1/2, u - 1/2; k) on [0, 1]^2; positivity recorded, not enforced."""
    if k < 2:
        raise ValueError("the four-cycle family needs k >= 2")
    system = system or solve_moment_system()
    params = {"k": int(k), "assignment": system.assignment}
    return assemble("four_cycle_family", params, rule or build_rule(), factors=_factors(system, k))


def four_cycle_min(k: int, system: Optional[MomentSystem] = None, points: int = DENSE_POINTS) -> float:
    system = system or solve_moment_system()
    grid = dense_grid(points)
    left, right = _factors(system, k)
    return _backend.lowrank_extremes(np.ascontiguousarray(left(grid)), np.ascontiguousarray(right(grid)))[0]


@dataclass(frozen=True)
class K0Search:
    k0: Optional[int]
    minimum: Optional[float]
    previous_minimum: Optional[float]
    k_max: int
    checked: int


def find_k0(k_max: int, system: Optional[MomentSystem] = None, points: int = DENSE_POINTS) -> K0Search:
    """Smallest k in [2, k_max] whose kernel is positive on the dense grid."""
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    system = system or solve_moment_system()
    grid = dense_grid(points)
    right = np.ascontiguousarray(np.vstack([np.ones_like(grid), system.psi_all(grid - 0.5)]))
    ones = np.ones_like(grid)
    prev = None
    for k in range(2, k_max + 1):
        left = np.ascontiguousarray(np.vstack([ones, _profiles(grid - 0.5, k)]))
        vmin = _backend.lowrank_extremes(left, right)[0]
        if vmin > 0:
            return K0Search(k, vmin, prev, k_max, k - 1)
        prev = vmin
    return K0Search(None, None, prev, k_max, k_max - 1)


def four_cycle_pairs(k: int) -> list:
    def root(expr):
        return lambda t: np.asarray(expr(np.asarray(t, float) - 0.5)) ** (1.0 / k)

    f1 = root(lambda s: 6.0 * s ** 2 + 0.5)
    f2 = root(lambda s: 20.0 * s ** 4 + 0.75)
    g1 = root(lambda s: s ** 3 + 1.0)
    g2 = root(lambda s: s ** 5 + 1.0)
    return [ClosedFormPair(f"four_cycle_f_k{k}", f1, f2, k), ClosedFormPair(f"four_cycle_g_k{k}", g1, g2, k)]
