"""Multistart search for 2-cycles of the normalised period-2 system and
residual verification of the catalog's closed-form pairs.

The iteration runs on f -> A_k(A_k f), so every iterate is normalised to 1 at
t = 0.  Converged pairs are converted to the Hammerstein form H_k f = g,
H_k g = f and accepted only if that system's residuals are small.  Nothing
here claims completeness: a missing solution is not evidence of absence.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import _backend
from .errors import NonPositiveError
from .grid import GridFunction, build_rule, sup_distance, write_csv
from .kernels import build_family, closed_form_pairs, find_k0
from .kernels.base import Kernel
from .operators import (
    A_FORM,
    H_FORM,
    CyclePair,
    a_to_h44,
    apply_A,
    apply_H,
    cycle_residual,
    hammerstein_to_a,
)

log = logging.getLogger(__name__)

FIXED_POINT = "fixed_point"
TWO_CYCLE = "two_cycle"
VERIFY_TOL = 1e-6
RESIDUAL_FLOOR = 1e-10

PREFERRED_SCHEME = {"k2_family": "gauss_legendre_split"}


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`find_cycles`.

    ``tolerance`` bounds the sup-distance of successive iterates relative to
    ``max(1, sup|f|)``.  ``damping`` is the initial relaxation factor; it drops
    to 0.5 automatically when successive steps keep alternating in sign.
    """

    k: int
    max_iterations: int = 5000
    tolerance: float = 1e-10
    damping: float = 1.0
    random_starts: int = 8
    perturbation: float = 0.01
    include_constant: bool = True
    include_catalog: bool = True
    dedup_radius: float = 1e-4
    seed: int = 0
    verify_tolerance: float = VERIFY_TOL
    blowup: float = 1e100
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if not self.dedup_radius > self.tolerance:
            raise ValueError("dedup radius must exceed the tolerance")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass(frozen=True, eq=False)
class IterationOutcome:
    label: str
    status: str
    iterations: int
    damping: float
    last_step: float
    pair: Optional[CyclePair] = None  # a_form, residuals filled
    hammerstein: Optional[CyclePair] = None  # hammerstein_44, residuals filled

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def log_entry(self) -> dict:
        out = {"start": self.label, "status": self.status, "iterations": self.iterations,
               "damping": self.damping, "last_step": self.last_step}
        if self.pair is not None:
            out["a_form_residuals"] = list(self.pair.residuals)
            out["gap"] = self.pair.gap
        if self.hammerstein is not None:
            out["residuals"] = list(self.hammerstein.residuals)
        return out


def iterate_pair(kernel: Kernel, k: int, f0, config: Optional[SolverConfig] = None,
                 label: str = "start") -> IterationOutcome:
    """Iterate f <- (1 - theta) f + theta A_k(A_k f) from ``f0``.

    On convergence the partner is g = A_k f and the returned pair is
    (A_k g, g), both equal to 1 at t = 0.  Failures carry a reason:
    ``max_iterations``, ``nonpositive`` or ``nonfinite``.

    Raises
    ------
    NonPositiveError
        If ``f0`` is not strictly positive.
    """
    config = config or SolverConfig(k=k)
    values = f0.values if isinstance(f0, GridFunction) else np.asarray(f0, dtype=float)
    if not np.all(values > 0):
        raise NonPositiveError("start function must be strictly positive")
    f, g, its, status, theta, step = _backend.iterate_composed(
        kernel.weighted, kernel.zero_weighted, values, int(k), float(config.damping),
        float(config.tolerance), int(config.max_iterations), float(config.blowup),
    )
    name = _backend.STATUS_NAMES[status]
    if g is None:
        return IterationOutcome(label, name, int(its), float(theta), float(step))
    rule = kernel.rule
    g_fn = GridFunction(rule, g, "g", 1.0)
    try:
        f_fn = apply_A(kernel, g_fn, k)
    except NonPositiveError:
        return IterationOutcome(label, "nonpositive", int(its), float(theta), float(step))
    pair = cycle_residual(kernel, CyclePair(GridFunction(rule, f_fn.values, "f", 1.0), g_fn, int(k), A_FORM))
    h44 = a_to_h44(kernel, pair) if k >= 2 else None
    return IterationOutcome(label, name, int(its), float(theta), float(step), pair, h44)


# ---------------------------------------------------------------- multistart

def _random_start(rng: np.random.Generator, t: np.ndarray, modes: int = 5) -> np.ndarray:
    c = rng.normal(scale=0.5 / (1.0 + np.arange(modes)))
    return np.exp(np.cos(np.pi * np.outer(t, np.arange(modes))) @ c)


def build_starts(kernel: Kernel, config: SolverConfig) -> list:
    """(label, values) start list: constant, catalog closed forms (exact and
    perturbed, in normalised form), then seeded random smooth positive functions."""
    rng = np.random.default_rng(config.seed)
    rule = kernel.rule
    starts = []
    if config.include_constant:
        starts.append(("constant", np.ones(rule.size)))
    if config.include_catalog and kernel.order == config.k:
        for cf in closed_form_pairs(kernel):
            h = CyclePair(rule.sample(cf.f, "f"), rule.sample(cf.g, "g"), config.k, H_FORM)
            a = hammerstein_to_a(kernel, h)
            for member, fn in (("f", a.f), ("g", a.g)):
                starts.append((f"catalog:{cf.name}:{member}", fn.values.copy()))
                noise = 1.0 + config.perturbation * rng.uniform(-1.0, 1.0, rule.size)
                starts.append((f"catalog:{cf.name}:{member}~", fn.values * noise))
    for i in range(config.random_starts):
        starts.append((f"random:{i}", _random_start(rng, rule.nodes)))
    return starts


def canonical(pair: CyclePair) -> CyclePair:
    """Order a pair so the member smaller at the first differing node comes first."""
    d = pair.f.values - pair.g.values
    scale = np.maximum(1.0, np.abs(pair.f.values))
    idx = np.flatnonzero(np.abs(d) > 1e-12 * scale)
    if idx.size and d[idx[0]] > 0:
        return pair.swapped()
    return pair


@dataclass(eq=False)
class FoundCycle:
    pair: CyclePair  # a_form, canonical order
    hammerstein: Optional[CyclePair]
    classification: str
    starts: list
    iterations: int

    @property
    def residuals(self) -> tuple:
        return (self.hammerstein or self.pair).residuals

    @property
    def gap(self) -> float:
        """sup|f - g| in Hammerstein form when available, else in normalised form."""
        return (self.hammerstein or self.pair).gap

    def to_dict(self, inline: bool = True) -> dict:
        out = {
            "classification": self.classification,
            "starts": list(self.starts),
            "iterations": self.iterations,
            "gap": self.gap,
            "a_form_gap": self.pair.gap,
            "a_form_residuals": list(self.pair.residuals),
            "residuals": list(self.residuals),
        }
        if inline:
            out["t"] = self.pair.f.rule.nodes.tolist()
            out["a_form"] = {"f": self.pair.f.values.tolist(), "g": self.pair.g.values.tolist()}
            if self.hammerstein is not None:
                out["hammerstein"] = {"f": self.hammerstein.f.values.tolist(),
                                      "g": self.hammerstein.g.values.tolist()}
        return out


@dataclass(eq=False)
class SolveResult:
    family: str
    params: dict
    config: SolverConfig
    cycles: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    log: list = field(default_factory=list)

    @property
    def two_cycles(self) -> list:
        return [c for c in self.cycles if c.classification == TWO_CYCLE]

    @property
    def fixed_points(self) -> list:
        return [c for c in self.cycles if c.classification == FIXED_POINT]

    def to_dict(self, inline: bool = True) -> dict:
        from .kernels.base import _jsonable

        return {
            "family": self.family,
            "params": _jsonable(self.params),
            "config": asdict(self.config),
            "backend": _backend.NAME,
            "cycles": [c.to_dict(inline) for c in self.cycles],
            "failures": [o.log_entry() for o in self.failures],
            "log": self.log,
        }

    def write(self, outdir, kernel: Optional[Kernel] = None) -> Path:
        """``solve.json`` plus one CSV per cycle (t, f, g, Hf, Hg in Hammerstein form)."""
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        doc = self.to_dict(inline=False)
        for i, c in enumerate(self.cycles):
            name = f"cycle_{i:02d}_{c.classification}.csv"
            write_plot_csv(outdir / name, c.hammerstein or c.pair, kernel)
            doc["cycles"][i]["file"] = name
        path = outdir / "solve.json"
        path.write_text(json.dumps(doc, indent=2))
        return path


def write_plot_csv(path, pair: CyclePair, kernel: Optional[Kernel] = None) -> Path:
    """Columns t, f, g, Hf, Hg; Hf/Hg use the pair's own operator when a kernel is given."""
    path = Path(path)
    cols = [pair.f.rule.nodes, pair.f.values, pair.g.values]
    header = ["t", "f", "g"]
    if kernel is not None:
        if pair.form == A_FORM:
            hf, hg = apply_A(kernel, pair.f, pair.k), apply_A(kernel, pair.g, pair.k)
        else:
            hf, hg = apply_H(kernel, pair.f, pair.k), apply_H(kernel, pair.g, pair.k)
        cols += [hf.values, hg.values]
        header += ["Hf", "Hg"]
    with path.open("w") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return path


def _verified(outcome: IterationOutcome, config: SolverConfig) -> bool:
    pair = outcome.hammerstein if outcome.hammerstein is not None else outcome.pair
    return bool(np.isfinite(pair.max_residual) and pair.max_residual < config.verify_tolerance)


def find_cycles(kernel: Kernel, config: SolverConfig) -> SolveResult:
    """Run every start, keep verified converged pairs, deduplicate and classify.

    Pairs closer than ``dedup_radius`` in sup-distance (on both members, after
    canonical ordering) are merged; a pair is a ``fixed_point`` when
    sup|f - g| < ``dedup_radius`` and a ``two_cycle`` otherwise.
    """
    if kernel.scan is not None and not kernel.scan.positive:
        raise NonPositiveError(f"{kernel.family} kernel is not positive on the scan grid")
    starts = build_starts(kernel, config)

    def run(item):
        label, values = item
        return iterate_pair(kernel, config.k, values, config, label)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(run, starts))
    else:
        outcomes = [run(s) for s in starts]

    result = SolveResult(kernel.family, dict(kernel.params), config)
    for out in outcomes:
        entry = out.log_entry()
        if not out.converged:
            result.failures.append(out)
        elif not _verified(out, config):
            entry["status"] = "unverified"
            result.failures.append(out)
        else:
            _merge(result, out, config)
        result.log.append(entry)
        log.debug("start %s: %s", out.label, entry["status"])
    return result


def _merge(result: SolveResult, out: IterationOutcome, config: SolverConfig) -> None:
    pair = canonical(out.pair)
    swapped = pair is not out.pair
    h44 = out.hammerstein
    if h44 is not None and swapped:
        h44 = h44.swapped()
    for c in result.cycles:
        if max(sup_distance(c.pair.f, pair.f), sup_distance(c.pair.g, pair.g)) < config.dedup_radius:
            c.starts.append(out.label)
            return
    kind = FIXED_POINT if pair.gap < config.dedup_radius else TWO_CYCLE
    result.cycles.append(FoundCycle(pair, h44, kind, [out.label], out.iterations))


# ---------------------------------------------------------------- catalog check

@dataclass(frozen=True)
class PairCheck:
    name: str
    nodes: int
    residuals: tuple


@dataclass(eq=False)
class CatalogVerification:
    family: str
    params: dict
    scheme: str
    nodes: int
    positive: bool
    scan_min: float
    checks: list
    tolerance: float = VERIFY_TOL

    def residuals_at(self, nodes: int) -> dict:
        return {c.name: c.residuals for c in self.checks if c.nodes == nodes}

    @property
    def passed(self) -> bool:
        return all(max(r) < self.tolerance for r in self.residuals_at(self.nodes).values())

    @property
    def refines(self) -> bool:
        """Residuals at 2N do not exceed those at N (or both sit below the floor)."""
        coarse, fine = self.residuals_at(self.nodes), self.residuals_at(2 * self.nodes)
        return all(max(fine[n]) <= max(max(coarse[n]), RESIDUAL_FLOOR) for n in coarse)

    def to_dict(self) -> dict:
        from .kernels.base import _jsonable

        return {
            "family": self.family,
            "params": _jsonable(self.params),
            "scheme": self.scheme,
            "nodes": self.nodes,
            "positive": self.positive,
            "scan_min": self.scan_min,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "refines": self.refines,
            "checks": [{"pair": c.name, "nodes": c.nodes, "r1": c.residuals[0], "r2": c.residuals[1]}
                       for c in self.checks],
        }


def catalog_params(family: str, params: Optional[dict] = None) -> dict:
    """Fill in default parameters: n0 for the k = 2 family, k0 for the four-cycle family."""
    from .kernels.catalog import find_n0

    p = dict(params or {})
    if family == "k2_family" and p.get("n") is None:
        p["n"] = find_n0()
    if family == "k_ge4_family" and p.get("k") is None:
        p["k"] = 4
    if family == "four_cycle_family" and p.get("k") is None:
        p["k"] = find_k0(10 ** 6).k0
    return {k: v for k, v in p.items() if v is not None}


def verify_catalog(family: str, params: Optional[dict] = None, node_count: int = 200,
                   scheme: Optional[str] = None, tolerance: float = VERIFY_TOL) -> CatalogVerification:
    """Residuals of every exhibited pair, in Hammerstein form, at N and 2N nodes.

    Raises
    ------
    ValueError
        For families without closed-form pairs.
    """
    if family not in ("k2_family", "k3_family", "k_ge4_family", "four_cycle_family"):
        raise ValueError(f"no closed-form pairs for family {family!r}")
    params = catalog_params(family, params)
    scheme = scheme or PREFERRED_SCHEME.get(family, "gauss_legendre")
    checks, kernel = [], None
    for n in (node_count, 2 * node_count):
        kern = build_family(family, build_rule(n, scheme), **params)
        kernel = kernel or kern
        for cf in closed_form_pairs(kern):
            pair = CyclePair(kern.rule.sample(cf.f), kern.rule.sample(cf.g), cf.k, H_FORM)
            checks.append(PairCheck(cf.name, n, cycle_residual(kern, pair).residuals))
    return CatalogVerification(family, dict(kernel.params), scheme, node_count, kernel.positive,
                               kernel.scan.minimum, checks, tolerance)
