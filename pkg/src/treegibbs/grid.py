"""Quadrature rules on [0, 1] and functions sampled on their nodes.

Everything downstream (operators, kernels, solver) works on the nodes of a
single :class:`QuadratureRule`.  Integrals are weighted node sums and norms
are maxima over nodes; no interpolation happens here.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import RuleMismatchError

SCHEMES = ("gauss_legendre", "gauss_legendre_split", "composite_simpson")

DEFAULT_NODES = 200
DEFAULT_SCHEME = "gauss_legendre"
DENSE_POINTS = 1001


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights for integrals over [0, 1] against Lebesgue measure.

    ``degree`` is the largest ``p`` such that ``u**p`` is integrated exactly
    (up to rounding).
    """

    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen(self.nodes))
        object.__setattr__(self, "weights", _frozen(self.weights))
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")

    @property
    def size(self) -> int:
        return self.nodes.size

    def same_as(self, other: "QuadratureRule") -> bool:
        return self is other or (
            self.scheme == other.scheme
            and self.size == other.size
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def integrate_values(self, values) -> float:
        return float(np.dot(self.weights, values))

    def sample(self, func: Callable, tag: Optional[str] = None) -> "GridFunction":
        """Sample a vectorised callable on the nodes (and at t = 0)."""
        values = np.asarray(func(self.nodes), dtype=float)
        at_zero = float(np.asarray(func(np.array([0.0])), dtype=float).reshape(-1)[0])
        return GridFunction(self, np.broadcast_to(values, self.nodes.shape), tag, at_zero)

    def describe(self) -> dict:
        return {"scheme": self.scheme, "nodes": self.size, "degree": self.degree}


def _gauss_on(a: float, b: float, n: int):
    x, w = leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def build_rule(node_count: int = DEFAULT_NODES, scheme: str = DEFAULT_SCHEME) -> QuadratureRule:
    """Build a quadrature rule on [0, 1].

    Parameters
    ----------
    node_count : int
        Number of nodes.  ``composite_simpson`` needs an odd count >= 3 and
        ``gauss_legendre_split`` an even count >= 2.
    scheme : {"gauss_legendre", "gauss_legendre_split", "composite_simpson"}
        ``gauss_legendre_split`` puts half the nodes on each of [0, 1/2] and
        [1/2, 1]; use it for integrands with a cusp at u = 1/2.

    Raises
    ------
    ValueError
        If ``node_count`` is invalid for ``scheme`` or the scheme is unknown.
    """
    n = int(node_count)
    if scheme == "gauss_legendre":
        if n < 2:
            raise ValueError("gauss_legendre needs node_count >= 2")
        nodes, weights = _gauss_on(0.0, 1.0, n)
        degree = 2 * n - 1
    elif scheme == "gauss_legendre_split":
        if n < 2 or n % 2:
            raise ValueError("gauss_legendre_split needs an even node_count >= 2")
        x1, w1 = _gauss_on(0.0, 0.5, n // 2)
        x2, w2 = _gauss_on(0.5, 1.0, n // 2)
        nodes, weights = np.concatenate([x1, x2]), np.concatenate([w1, w2])
        degree = n - 1
    elif scheme == "composite_simpson":
        if n < 3 or n % 2 == 0:
            raise ValueError("composite_simpson needs an odd node_count >= 3")
        nodes = np.linspace(0.0, 1.0, n)
        h = 1.0 / (n - 1)
        weights = np.full(n, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        weights *= h / 3.0
        degree = 3
    else:
        raise ValueError(f"unknown quadrature scheme {scheme!r}; expected one of {SCHEMES}")
    return QuadratureRule(nodes, weights, scheme, degree)


def dense_grid(points: int = DENSE_POINTS) -> np.ndarray:
    """Equispaced scan grid on [0, 1], endpoints included."""
    return np.linspace(0.0, 1.0, points)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A function on [0, 1] known through its values at the rule's nodes.

    ``at_zero`` carries the value at t = 0 when it is known (closed forms,
    operator outputs); Gauss nodes never include 0.
    """

    rule: QuadratureRule
    values: np.ndarray
    tag: Optional[str] = None
    at_zero: Optional[float] = field(default=None)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != self.rule.nodes.shape:
            raise ValueError(f"expected {self.rule.size} values, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes

    def is_positive(self) -> bool:
        return bool(np.all(self.values > 0))

    def with_values(self, values, tag: Optional[str] = None, at_zero: Optional[float] = None) -> "GridFunction":
        return GridFunction(self.rule, values, tag, at_zero)

    def __len__(self):
        return self.values.size


def constant(rule: QuadratureRule, c: float, tag: Optional[str] = None) -> GridFunction:
    return GridFunction(rule, np.full(rule.size, float(c)), tag, float(c))


def check_same_rule(*items) -> QuadratureRule:
    rules = [getattr(x, "rule", x) for x in items]
    first = rules[0]
    for r in rules[1:]:
        if not first.same_as(r):
            raise RuleMismatchError("grid objects are bound to different quadrature rules")
    return first


def integrate(f: GridFunction) -> float:
    """Quadrature of ``f`` over [0, 1]."""
    return f.rule.integrate_values(f.values)


def signed_root(x, n: int):
    """Real n-th root continued to negative arguments: sign(x) * |x|**(1/n)."""
    if n < 1:
        raise ValueError("root order must be a positive integer")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.abs(x) ** (1.0 / n)
    return out if out.ndim else float(out)


def sup_norm(f: GridFunction) -> float:
    return float(np.max(np.abs(f.values)))


def sup_distance(f: GridFunction, g: GridFunction) -> float:
    check_same_rule(f, g)
    return float(np.max(np.abs(f.values - g.values)))


def write_csv(f: GridFunction, path) -> Path:
    """Write ``t,value`` rows with 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for t, v in zip(f.rule.nodes, f.values):
            w.writerow([f"{t:.17g}", f"{v:.17g}"])
    return path


def read_csv(path, rule: QuadratureRule, tag: Optional[str] = None) -> GridFunction:
    """Read a ``t,value`` file written for ``rule``; the node column must match."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "value"]:
        raise ValueError(f"{path}: expected header 't,value'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    if data.shape[0] != rule.size or not np.allclose(data[:, 0], rule.nodes, rtol=0, atol=1e-15):
        raise RuleMismatchError(f"{path}: node column does not match the {rule.scheme} rule with {rule.size} nodes")
    return GridFunction(rule, data[:, 1], tag)
