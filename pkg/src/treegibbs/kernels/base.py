"""Kernel container, positivity scans, the xi <-> kernel maps and file I/O."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .. import _backend
from ..errors import NonPositiveError
from ..grid import DENSE_POINTS, QuadratureRule, build_rule, dense_grid

FAMILIES = ("generic_xi", "k2_family", "k3_family", "k_ge4_family", "four_cycle_family", "file")

# (t array) -> (R, len(t)) left factor, (u array) -> (R, len(u)) right factor
Factors = tuple


@dataclass(frozen=True)
class PositivityScan:
    minimum: float
    maximum: float
    argmin: tuple
    argmax: tuple
    points: int
    source: str  # "dense" or "nodes"

    @property
    def positive(self) -> bool:
        return self.minimum > 0.0

    def to_dict(self) -> dict:
        return {
            "minimum": self.minimum,
            "maximum": self.maximum,
            "argmin": list(self.argmin),
            "argmax": list(self.argmax),
            "points": self.points,
            "source": self.source,
            "positive": self.positive,
        }


def _ro(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Kernel:
    """A kernel K(t, u) on [0, 1]^2 discretised on a quadrature rule.

    ``matrix[i, j] = K(t_i, u_j)`` and ``zero_row[j] = K(0, u_j)``.  Catalog
    and expression kernels also carry ``evaluator(t, u)`` returning the outer
    evaluation matrix; file kernels do not.
    """

    family: str
    params: dict
    rule: QuadratureRule
    matrix: np.ndarray
    zero_row: np.ndarray
    evaluator: Optional[Callable] = field(default=None, repr=False)
    factors: Optional[Factors] = field(default=None, repr=False)
    scan: Optional[PositivityScan] = None

    def __post_init__(self):
        m, z = _ro(self.matrix), _ro(self.zero_row)
        n = self.rule.size
        if m.shape != (n, n) or z.shape != (n,):
            raise ValueError(f"kernel data has shape {m.shape}/{z.shape}, rule has {n} nodes")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(z))):
            raise ValueError("kernel has non-finite entries")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "zero_row", z)
        object.__setattr__(self, "_kw", np.ascontiguousarray(m * self.rule.weights))
        object.__setattr__(self, "_zw", np.ascontiguousarray(z * self.rule.weights))

    @property
    def weighted(self) -> np.ndarray:
        """``K(t_i, u_j) * w_j``; the Nystrom matrix."""
        return self._kw

    @property
    def zero_weighted(self) -> np.ndarray:
        return self._zw

    @property
    def order(self) -> Optional[int]:
        """Branching order k the family was built for, if any."""
        return self.params.get("k")

    @property
    def can_evaluate(self) -> bool:
        return self.evaluator is not None

    @property
    def positive(self) -> bool:
        return self.scan is not None and self.scan.positive

    def evaluate(self, t, u) -> np.ndarray:
        if self.evaluator is None:
            raise NotImplementedError(f"{self.family} kernel is only known at the quadrature nodes")
        return np.asarray(self.evaluator(np.atleast_1d(np.asarray(t, float)), np.atleast_1d(np.asarray(u, float))))

    def describe(self) -> dict:
        out = {"family": self.family, "params": _jsonable(self.params), "rule": self.rule.describe()}
        if self.scan is not None:
            out["scan"] = self.scan.to_dict()
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if hasattr(obj, "numerator") and hasattr(obj, "denominator") and not isinstance(obj, int):
        return str(obj)
    return obj


def factored_evaluator(factors: Factors) -> Callable:
    left, right = factors

    def evaluate(t, u):
        return left(t).T @ right(u)

    return evaluate


def scan_kernel(evaluator=None, factors=None, points: int = DENSE_POINTS) -> PositivityScan:
    """Extremes of a kernel on the dense equispaced grid."""
    grid = dense_grid(points)
    if factors is not None:
        left, right = factors
        vmin, vmax, i0, j0, i1, j1 = _backend.lowrank_extremes(
            np.ascontiguousarray(left(grid)), np.ascontiguousarray(right(grid))
        )
    else:
        vals = evaluator(grid, grid)
        i0, j0 = np.unravel_index(np.argmin(vals), vals.shape)
        i1, j1 = np.unravel_index(np.argmax(vals), vals.shape)
        vmin, vmax = float(vals[i0, j0]), float(vals[i1, j1])
    return PositivityScan(
        float(vmin), float(vmax), (float(grid[i0]), float(grid[j0])), (float(grid[i1]), float(grid[j1])), points, "dense"
    )


def scan_nodes(matrix, zero_row, rule: QuadratureRule) -> PositivityScan:
    full = np.vstack([zero_row, matrix])
    ts = np.concatenate([[0.0], rule.nodes])
    i0, j0 = np.unravel_index(np.argmin(full), full.shape)
    i1, j1 = np.unravel_index(np.argmax(full), full.shape)
    return PositivityScan(
        float(full[i0, j0]), float(full[i1, j1]),
        (float(ts[i0]), float(rule.nodes[j0])), (float(ts[i1]), float(rule.nodes[j1])),
        int(full.size), "nodes",
    )


def assemble(family: str, params: dict, rule: QuadratureRule, evaluator=None, factors=None,
             scan_points: int = DENSE_POINTS) -> Kernel:
    """Evaluate a kernel on the rule's nodes and run the dense positivity scan."""
    if evaluator is None:
        evaluator = factored_evaluator(factors)
    nodes = rule.nodes
    matrix = evaluator(nodes, nodes)
    zero_row = evaluator(np.array([0.0]), nodes)[0]
    scan = scan_kernel(evaluator, factors, scan_points)
    return Kernel(family, dict(params), rule, matrix, zero_row, evaluator, factors, scan)


def require_positive(kernel: Kernel) -> Kernel:
    """Raise :class:`NonPositiveError` with the scan diagnostic unless positive."""
    s = kernel.scan
    if s is None or not s.positive:
        where = f" (min {s.minimum:.6g} at t,u = {s.argmin[0]:.4f},{s.argmin[1]:.4f} on {s.source} grid)" if s else ""
        raise NonPositiveError(f"{kernel.family} {kernel.params} is not positive{where}")
    return kernel


# ---------------------------------------------------------------------------
# interaction function xi and the map K = exp(J beta xi)

@dataclass(frozen=True, eq=False)
class XiGrid:
    """An interaction xi(t, u) known on the nodes plus its t = 0 row."""

    rule: QuadratureRule
    matrix: np.ndarray
    zero_row: np.ndarray
    evaluator: Optional[Callable] = field(default=None, repr=False)
    name: str = "grid"

    def __call__(self, t, u):
        if self.evaluator is None:
            raise NotImplementedError("xi grid has no closed-form evaluator")
        return self.evaluator(np.atleast_1d(t), np.atleast_1d(u))


def _xi_zero(t, u):
    return np.zeros((len(t), len(u)))


def _xi_product(t, u):
    return np.outer(t, u)


def _xi_abs_diff(t, u):
    return np.abs(np.subtract.outer(t, u))


def _xi_squared_diff(t, u):
    return np.subtract.outer(t, u) ** 2


def _xi_cos_diff(t, u):
    return np.cos(np.pi * np.subtract.outer(t, u))


BUILTIN_XI = {
    "zero": _xi_zero,
    "product": _xi_product,
    "abs_diff": _xi_abs_diff,
    "squared_diff": _xi_squared_diff,
    "cos_diff": _xi_cos_diff,
}


def random_symmetric_xi(rng: np.random.Generator, modes: int = 4, amplitude: float = 1.0):
    """Random bounded symmetric xi(t,u) = sum C_ab cos(a pi t) cos(b pi u)."""
    c = rng.normal(scale=amplitude / modes, size=(modes, modes))
    c = 0.5 * (c + c.T)
    a = np.arange(modes)

    def xi(t, u):
        return np.cos(np.pi * np.outer(a, t)).T @ c @ np.cos(np.pi * np.outer(a, u))

    return xi


def kernel_from_xi(xi: Union[str, Callable, XiGrid], J: float, beta: float,
                   rule: Optional[QuadratureRule] = None, name: Optional[str] = None) -> Kernel:
    """K(t, u) = exp(J * beta * xi(t, u)).

    ``xi`` is a builtin name (see ``BUILTIN_XI``), a vectorised callable
    ``xi(t_array, u_array) -> outer matrix``, or an :class:`XiGrid`.
    """
    if J == 0:
        raise ValueError("J must be nonzero")
    if not beta > 0:
        raise ValueError("beta must be positive")
    jb = float(J) * float(beta)
    if isinstance(xi, str):
        name = name or xi
        try:
            xi = BUILTIN_XI[xi]
        except KeyError:
            raise ValueError(f"unknown builtin xi {xi!r}; known: {sorted(BUILTIN_XI)}") from None
    params = {"J": float(J), "beta": float(beta), "xi": name or getattr(xi, "name", None) or getattr(xi, "__name__", "callable")}
    if isinstance(xi, XiGrid):
        if rule is not None and not rule.same_as(xi.rule):
            raise ValueError("xi grid is bound to a different rule")
        for arr in (xi.matrix, xi.zero_row):
            if not np.all(np.isfinite(arr)):
                raise ValueError("xi has non-finite entries")
        if xi.evaluator is not None:
            return kernel_from_xi(xi.evaluator, J, beta, xi.rule, name=xi.name)
        matrix, zero_row = np.exp(jb * xi.matrix), np.exp(jb * xi.zero_row)
        return Kernel("generic_xi", params, xi.rule, matrix, zero_row, None, None,
                      scan_nodes(matrix, zero_row, xi.rule))
    rule = rule or build_rule()

    def evaluate(t, u):
        vals = np.asarray(xi(t, u), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("xi has non-finite entries")
        return np.exp(jb * vals)

    return assemble("generic_xi", params, rule, evaluate)


def kernel_to_xi(kernel: Kernel, J: float, beta: float) -> XiGrid:
    """xi = ln K / (J beta), the interaction that reproduces ``kernel``."""
    if J == 0:
        raise ValueError("J must be nonzero")
    if not beta > 0:
        raise ValueError("beta must be positive")
    if np.any(kernel.matrix <= 0) or np.any(kernel.zero_row <= 0):
        raise NonPositiveError("kernel has nonpositive entries; ln K undefined")
    jb = float(J) * float(beta)
    evaluator = None
    if kernel.evaluator is not None:
        ev = kernel.evaluator

        def evaluator(t, u):
            vals = ev(t, u)
            if np.any(vals <= 0):
                raise NonPositiveError("kernel has nonpositive values; ln K undefined")
            return np.log(vals) / jb

    return XiGrid(kernel.rule, np.log(kernel.matrix) / jb, np.log(kernel.zero_row) / jb, evaluator,
                  name=f"ln({kernel.family})")


# ---------------------------------------------------------------------------
# files: CSV matrix with a node header row/column plus a JSON sidecar

def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def write_matrix_csv(path, rule: QuadratureRule, matrix, zero_row, corner: str = "t\\u") -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([corner] + [f"{u:.17g}" for u in rule.nodes])
        w.writerow(["0"] + [f"{v:.17g}" for v in zero_row])
        for t, row in zip(rule.nodes, matrix):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in row])
    return path


def read_matrix_csv(path, rule: QuadratureRule):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    head = np.array([float(x) for x in rows[0][1:]])
    body = np.array([[float(x) for x in r] for r in rows[1:]])
    if head.size != rule.size or not np.allclose(head, rule.nodes, rtol=0, atol=1e-15):
        raise ValueError(f"{path}: header nodes do not match a {rule.scheme} rule with {rule.size} nodes")
    if body.shape != (rule.size + 1, rule.size + 1) or body[0, 0] != 0.0:
        raise ValueError(f"{path}: expected a t=0 row followed by {rule.size} node rows")
    if not np.allclose(body[1:, 0], rule.nodes, rtol=0, atol=1e-15):
        raise ValueError(f"{path}: row nodes do not match the rule")
    return body[1:, 1:], body[0, 1:]


def export_kernel(kernel: Kernel, path) -> tuple:
    """Write ``path`` (CSV matrix, first data row t = 0) and a ``.json`` sidecar."""
    path = Path(path)
    write_matrix_csv(path, kernel.rule, kernel.matrix, kernel.zero_row)
    meta = kernel.describe()
    side = _sidecar(path)
    side.write_text(json.dumps(meta, indent=2))
    return path, side


def load_kernel(path, rule: Optional[QuadratureRule] = None) -> Kernel:
    """Read an exported kernel as a ``file`` kernel (node evaluation only)."""
    path = Path(path)
    meta = {}
    if _sidecar(path).exists():
        meta = json.loads(_sidecar(path).read_text())
    if rule is None:
        if "rule" not in meta:
            raise ValueError(f"{path}: no sidecar with the quadrature rule; pass rule=")
        rule = build_rule(meta["rule"]["nodes"], meta["rule"]["scheme"])
    matrix, zero_row = read_matrix_csv(path, rule)
    params = {"source": str(path), "origin": meta.get("family")}
    return Kernel("file", params, rule, matrix, zero_row, None, None, scan_nodes(matrix, zero_row, rule))


def load_xi(path, rule: QuadratureRule) -> XiGrid:
    """Read xi values in the kernel CSV layout (t = 0 row first)."""
    matrix, zero_row = read_matrix_csv(path, rule)
    return XiGrid(rule, matrix, zero_row, None, name=Path(path).name)
