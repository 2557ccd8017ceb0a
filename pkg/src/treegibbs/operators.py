"""Nystrom versions of W, omega, A_k and H_k, and the maps between the
normalised and Hammerstein forms of the period-2 system.

Forms of a candidate pair (f, g):

``a_form_28``
    A_k f = g, A_k g = f with A_k f = (Wf / (Wf)(0))^k.
``hammerstein_lambda_43``
    H_k f = lambda1 g, H_k g = lambda2 f, with f(0) = g(0) = 1.
``hammerstein_44``
    H_k f = g, H_k g = f.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import NonPositiveError
from .grid import GridFunction, check_same_rule, sup_distance
from .kernels.base import Kernel

A_FORM = "a_form_28"
LAMBDA_FORM = "hammerstein_lambda_43"
H_FORM = "hammerstein_44"
FORMS = (A_FORM, LAMBDA_FORM, H_FORM)


@dataclass(frozen=True, eq=False)
class CyclePair:
    f: GridFunction
    g: GridFunction
    k: int
    form: str = H_FORM
    residuals: Optional[tuple] = None
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"unknown form {self.form!r}")
        check_same_rule(self.f, self.g)
        if not (self.f.is_positive() and self.g.is_positive()):
            raise NonPositiveError("cycle pair members must be strictly positive on the nodes")
        if self.form == LAMBDA_FORM and (self.lambda1 is None or self.lambda2 is None):
            raise ValueError("lambda form needs lambda1 and lambda2")

    @property
    def max_residual(self) -> float:
        if self.residuals is None:
            return float("nan")
        return max(self.residuals)

    @property
    def gap(self) -> float:
        """sup |f - g| over the nodes."""
        return sup_distance(self.f, self.g)

    def swapped(self) -> "CyclePair":
        res = None if self.residuals is None else (self.residuals[1], self.residuals[0])
        return replace(self, f=self.g, g=self.f, residuals=res, lambda1=self.lambda2, lambda2=self.lambda1)


def _check(kernel: Kernel, f: GridFunction):
    check_same_rule(kernel, f)


def apply_W(kernel: Kernel, f: GridFunction) -> GridFunction:
    """(Wf)(t_i) = sum_j w_j K(t_i, u_j) f(u_j); the value at t = 0 uses the t = 0 row."""
    _check(kernel, f)
    return GridFunction(f.rule, kernel.weighted @ f.values, "W", float(kernel.zero_weighted @ f.values))


def omega(kernel: Kernel, f: GridFunction) -> float:
    """omega(f) = (Wf)(0) = integral of K(0, u) f(u) du."""
    _check(kernel, f)
    return float(kernel.zero_weighted @ f.values)


def apply_A(kernel: Kernel, f: GridFunction, k: int) -> GridFunction:
    """(A_k f)(t) = ((Wf)(t) / (Wf)(0))^k; equal to 1 at t = 0 by construction."""
    _check(kernel, f)
    if k < 1:
        raise ValueError("k must be a positive integer")
    if not f.is_positive():
        raise NonPositiveError("A_k needs a strictly positive argument")
    w0 = omega(kernel, f)
    if not w0 > 0:
        raise NonPositiveError(f"omega(f) = {w0:.6g} is not positive")
    wf = kernel.weighted @ f.values
    return GridFunction(f.rule, (wf / w0) ** k, "A", 1.0)


def apply_H(kernel: Kernel, f: GridFunction, k: int) -> GridFunction:
    """(H_k f)(t_i) = sum_j w_j K(t_i, u_j) f(u_j)^k."""
    _check(kernel, f)
    if k < 1:
        raise ValueError("k must be a positive integer")
    if np.any(f.values < 0):
        raise NonPositiveError("H_k is applied to nonnegative functions")
    fk = f.values ** k
    return GridFunction(f.rule, kernel.weighted @ fk, "H", float(kernel.zero_weighted @ fk))


def evaluate_H(kernel: Kernel, f: GridFunction, k: int, points) -> np.ndarray:
    """H_k f at arbitrary points; needs a kernel with an evaluator."""
    _check(kernel, f)
    rows = kernel.evaluate(points, f.rule.nodes)
    return rows @ (f.rule.weights * f.values ** k)


def value_at_zero(kernel: Kernel, pair_member: GridFunction, partner: GridFunction, k: int,
                  lam: float = 1.0) -> float:
    """f(0) for a member of a Hammerstein pair: stored, else (H_k partner)(0) / lam."""
    if pair_member.at_zero is not None:
        return float(pair_member.at_zero)
    return float(kernel.zero_weighted @ partner.values ** k) / lam


def cycle_residual(kernel: Kernel, pair: CyclePair) -> CyclePair:
    """Return ``pair`` with ``residuals = (sup|T f - g|, sup|T g - f|)`` for its form."""
    check_same_rule(kernel, pair.f, pair.g)
    k = pair.k
    if pair.form == A_FORM:
        tf, tg = apply_A(kernel, pair.f, k).values, apply_A(kernel, pair.g, k).values
        r = (np.max(np.abs(tf - pair.g.values)), np.max(np.abs(tg - pair.f.values)))
    else:
        hf, hg = apply_H(kernel, pair.f, k).values, apply_H(kernel, pair.g, k).values
        l1, l2 = (pair.lambda1, pair.lambda2) if pair.form == LAMBDA_FORM else (1.0, 1.0)
        r = (np.max(np.abs(hf - l1 * pair.g.values)), np.max(np.abs(hg - l2 * pair.f.values)))
    return replace(pair, residuals=(float(r[0]), float(r[1])))


def a_to_hammerstein(kernel: Kernel, pair: CyclePair) -> CyclePair:
    """(f0, g0) solving A_k f0 = g0, A_k g0 = f0  ->  (f0^(1/k), g0^(1/k)) with
    lambda1 = omega(f0), lambda2 = omega(g0)."""
    if pair.form != A_FORM:
        raise ValueError("expected an a_form pair")
    k = pair.k
    if k < 2:
        raise ValueError("the Hammerstein form needs k >= 2")
    if not (pair.f.is_positive() and pair.g.is_positive()):
        raise NonPositiveError("pair must be strictly positive")
    l1, l2 = omega(kernel, pair.f), omega(kernel, pair.g)
    if not (l1 > 0 and l2 > 0):
        raise NonPositiveError("omega must be positive on both members")

    def root(h: GridFunction) -> GridFunction:
        z = None if h.at_zero is None else h.at_zero ** (1.0 / k)
        return GridFunction(h.rule, h.values ** (1.0 / k), h.tag, z)

    out = CyclePair(root(pair.f), root(pair.g), k, LAMBDA_FORM, None, l1, l2)
    return cycle_residual(kernel, out)


def rescale_constants(lambda1: float, lambda2: float, k: int) -> tuple:
    """C1 = l1^(1/(k+1)) (l1 l2)^(1/(k^2-1)), C2 likewise with l2."""
    if not (lambda1 > 0 and lambda2 > 0):
        raise NonPositiveError("lambda1 and lambda2 must be positive")
    if k < 2:
        raise ValueError("rescaling needs k >= 2")
    common = (lambda1 * lambda2) ** (1.0 / (k * k - 1))
    return lambda1 ** (1.0 / (k + 1)) * common, lambda2 ** (1.0 / (k + 1)) * common


def rescale_pair(f: GridFunction, g: GridFunction, lambda1: float, lambda2: float, k: int,
                 kernel: Optional[Kernel] = None) -> CyclePair:
    """(f, g) solving H_k f = l1 g, H_k g = l2 f  ->  (f / C1, g / C2) solving H_k f = g, H_k g = f.

    Residuals are filled in when ``kernel`` is given.
    """
    c1, c2 = rescale_constants(lambda1, lambda2, k)

    def scale(h: GridFunction, c: float) -> GridFunction:
        return GridFunction(h.rule, h.values / c, h.tag, None if h.at_zero is None else h.at_zero / c)

    out = CyclePair(scale(f, c1), scale(g, c2), k, H_FORM)
    return cycle_residual(kernel, out) if kernel is not None else out


def hammerstein_to_a(kernel: Kernel, pair: CyclePair) -> CyclePair:
    """Inverse path: (F, G) solving H_k F = G, H_k G = F  ->  ((F/F(0))^k, (G/G(0))^k)."""
    if pair.form != H_FORM:
        raise ValueError("expected a hammerstein_44 pair")
    k = pair.k
    f0 = value_at_zero(kernel, pair.f, pair.g, k)
    g0 = value_at_zero(kernel, pair.g, pair.f, k)
    if not (f0 > 0 and g0 > 0):
        raise NonPositiveError("pair members must be positive at t = 0")
    fa = GridFunction(pair.f.rule, (pair.f.values / f0) ** k, pair.f.tag, 1.0)
    ga = GridFunction(pair.g.rule, (pair.g.values / g0) ** k, pair.g.tag, 1.0)
    return cycle_residual(kernel, CyclePair(fa, ga, k, A_FORM))


def a_to_h44(kernel: Kernel, pair: CyclePair) -> CyclePair:
    """Both normalisation steps at once: a_form -> hammerstein_44 with residuals."""
    lam = a_to_hammerstein(kernel, pair)
    return rescale_pair(lam.f, lam.g, lam.lambda1, lam.lambda2, pair.k, kernel)
