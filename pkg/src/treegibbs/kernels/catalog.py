"""Closed-form kernel families with explicit period-2 solutions.

Each family is stored in separable form K(t, u) = sum_r L_r(t) R_r(u), which
is what the dense positivity scan consumes.  ``closed_form_pairs`` returns the
exhibited solutions (f, g) of H_k f = g, H_k g = f as callables on [0, 1].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from ..grid import QuadratureRule, build_rule, signed_root
from .base import Kernel, assemble

# K3 normalisation: a**4 = 198 sqrt(3) / (5 pi)
K3_A4 = 198.0 * math.sqrt(3.0) / (5.0 * math.pi)
K3_A = K3_A4 ** 0.25
K3_COUPLING = 22.0 / 17.0

# rational arithmetic for c_k up to this k
EXACT_CK_LIMIT = 64


@dataclass(frozen=True)
class ClosedFormPair:
    name: str
    f: Callable
    g: Callable
    k: int


# ---------------------------------------------------------------- k = 2 family

def b_n(n: int) -> float:
    """(4**(-1/n))**(n-1) * (1 + 2/n)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return (4.0 ** (-1.0 / n)) ** (n - 1) * (1.0 + 2.0 / n)


def c_n_cubed(n: int, nodes: int = 200) -> float:
    """(1/2) * integral over [-1/2, 1/2] of (2 + root_n(u))**-2.

    Each half is mapped by u = +-s**n, which removes the |u|**(1/n) cusp at 0:
    the integrand becomes n s**(n-1) / (2 +- s)**2 on [0, 2**(-1/n)], smooth
    enough for plain Gauss-Legendre.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    x, w = np.polynomial.legendre.leggauss(nodes)
    top = 0.5 ** (1.0 / n)
    s, w = 0.5 * top * (x + 1.0), 0.5 * top * w
    jac = n * s ** (n - 1)
    total = np.dot(w, jac / (2.0 + s) ** 2) + np.dot(w, jac / (2.0 - s) ** 2)
    return 0.5 * float(total)


def c_n(n: int) -> float:
    return c_n_cubed(n) ** (1.0 / 3.0)


def _k2_factors(n: int, b: float, c: float):
    c3 = c ** 3

    def left(t):
        t = np.asarray(t, float)
        return np.vstack([np.ones_like(t), signed_root(t - 0.5, n)])

    def right(u):
        u = np.asarray(u, float)
        s = signed_root(u - 0.5, n)
        den = c * c * (s + 2.0) ** 2
        num1 = s * (signed_root((u - 0.5) ** 2, n) - 4.0) ** 2
        return np.vstack([1.0 / den, -b * c3 * num1 / den])

    return left, right


def build_k2_kernel(n: int, rule: Optional[QuadratureRule] = None) -> Kernel:
    """K_n(t,u) = (1 - b_n c_n^3 r(u) (r2(u) - 4)^2 r(t)) / (c_n^2 (r(u) + 2)^2).

    ``r`` is the signed n-th root of (x - 1/2) and ``r2`` the n-th root of
    (x - 1/2)^2.  Positivity is scanned, not enforced: small n may fail.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    b, c = b_n(n), c_n(n)
    params = {"n": int(n), "k": 2, "b_n": b, "c_n": c}
    return assemble("k2_family", params, rule or build_rule(), factors=_k2_factors(n, b, c))


def k2_pairs(n: int) -> list:
    c = c_n(n)
    f = lambda t: c * (signed_root(np.asarray(t, float) - 0.5, n) + 2.0)  # noqa: E731
    one = lambda t: np.ones_like(np.asarray(t, float))  # noqa: E731
    return [ClosedFormPair(f"k2_n{n}", f, one, 2)]


# ---------------------------------------------------------------- k = 3 family

def _k3_factors():
    a3 = K3_A ** 3

    def left(t):
        t = np.asarray(t, float)
        return np.vstack([np.ones_like(t), np.sin(np.pi * (2.0 * t - 1.0) / 3.0)])

    def right(u):
        s = np.sin(np.pi * (2.0 * np.asarray(u, float) - 1.0) / 3.0)
        den = a3 * (1.0 + s) ** 3
        return np.vstack([1.0 / den, -K3_COUPLING * s / den])

    return left, right


def build_k3_kernel(rule: Optional[QuadratureRule] = None) -> Kernel:
    """K(t,u) = (1 - 22/17 sin(pi(2t-1)/3) sin(pi(2u-1)/3)) / (a^3 (1 + sin(pi(2u-1)/3))^3)."""
    return assemble("k3_family", {"k": 3, "a": K3_A}, rule or build_rule(), factors=_k3_factors())


def k3_pairs() -> list:
    f = lambda t: K3_A * (1.0 + np.sin(np.pi * (2.0 * np.asarray(t, float) - 1.0) / 3.0))  # noqa: E731
    one = lambda t: np.ones_like(np.asarray(t, float))  # noqa: E731
    return [ClosedFormPair("k3", f, one, 3)]


# ---------------------------------------------------------------- k >= 4 family

def c_k_exact(k: int) -> Fraction:
    """c_k as an exact rational."""
    if k < 4:
        raise ValueError("c_k is defined for k >= 4")
    third = Fraction(1, 3)
    p1 = 1 - third ** (k - 1)
    p2 = 1 - third ** (k - 2)
    return 2 * p1 / (Fraction(k - 1, k - 2) * p2 - 2 * p1)


def c_k(k: int) -> float:
    if k <= EXACT_CK_LIMIT:
        return float(c_k_exact(k))
    p1 = 1.0 - (1.0 / 3.0) ** (k - 1)
    p2 = 1.0 - (1.0 / 3.0) ** (k - 2)
    return 2.0 * p1 / ((k - 1) / (k - 2) * p2 - 2.0 * p1)


def a_k(k: int) -> float:
    """((2^(k-1)/(k-1)) (1 - 3^-(k-1)))^(1/(k+1))."""
    if k < 2:
        raise ValueError("a(k) needs k >= 2")
    base = (2.0 ** (k - 1) / (k - 1)) * (1.0 - (1.0 / 3.0) ** (k - 1))
    return base ** (1.0 / (k + 1))


def _kge4_factors(k: int, c: float, a: float):
    def left(t):
        t = np.asarray(t, float)
        return np.vstack([np.ones_like(t), t - 0.5])

    def right(u):
        u = np.asarray(u, float)
        den = a ** k * (u + 0.5) ** k
        return np.vstack([1.0 / den, c * (u - 0.5) / den])

    return left, right


def build_k_ge4_kernel(k: int, rule: Optional[QuadratureRule] = None) -> Kernel:
    """K(t,u,k) = (1 + c_k (t-1/2)(u-1/2)) / (a(k)^k (u+1/2)^k)."""
    if k < 4:
        raise ValueError("the k >= 4 family needs k >= 4")
    c, a = c_k(k), a_k(k)
    params = {"k": int(k), "c_k": c, "a": a}
    if k <= EXACT_CK_LIMIT:
        params["c_k_exact"] = str(c_k_exact(k))
    return assemble("k_ge4_family", params, rule or build_rule(), factors=_kge4_factors(k, c, a))


def kge4_pairs(k: int) -> list:
    a = a_k(k)
    f = lambda t: a * (np.asarray(t, float) + 0.5)  # noqa: E731
    one = lambda t: np.ones_like(np.asarray(t, float))  # noqa: E731
    return [ClosedFormPair(f"kge4_k{k}", f, one, k)]


# ---------------------------------------------------------------- dispatch

def closed_form_pairs(kernel: Kernel) -> list:
    """Exhibited (f, g) pairs for a catalog kernel; empty for other families."""
    from .moments import four_cycle_pairs

    fam, p = kernel.family, kernel.params
    if fam == "k2_family":
        return k2_pairs(p["n"])
    if fam == "k3_family":
        return k3_pairs()
    if fam == "k_ge4_family":
        return kge4_pairs(p["k"])
    if fam == "four_cycle_family":
        return four_cycle_pairs(p["k"])
    return []


def find_n0(n_max: int = 64) -> int:
    """Smallest n whose k = 2 family kernel is positive on the dense grid."""
    from .base import scan_kernel

    for n in range(1, n_max + 1):
        if scan_kernel(factors=_k2_factors(n, b_n(n), c_n(n))).positive:
            return n
    raise ValueError(f"no positive k = 2 kernel for n <= {n_max}")
