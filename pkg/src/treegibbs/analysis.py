"""Kernel extremes, the sufficient non-existence condition, the a priori
solution band, and sign-change diagnostics for candidate 2-cycles."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import NonPositiveError
from .grid import GridFunction, check_same_rule, sup_norm
from .kernels.base import Kernel, scan_nodes

NO_PERIOD2 = "no_period2_guaranteed"
INCONCLUSIVE = "inconclusive"
BAND_SLACK = 1e-9


@dataclass(frozen=True)
class Extremes:
    M: float
    m: float
    source: str  # "dense" or "nodes"
    points: int


def extremes(kernel: Kernel) -> Extremes:
    """M = max K and m = min K over [0, 1]^2.

    Uses the dense scan when the kernel can be evaluated off the nodes, the
    node matrix (plus the t = 0 row) otherwise.
    """
    scan = kernel.scan
    if scan is None:
        scan = scan_nodes(kernel.matrix, kernel.zero_row, kernel.rule)
    if not scan.minimum > 0:
        raise NonPositiveError(f"kernel minimum {scan.minimum:.6g} is not positive")
    return Extremes(scan.maximum, scan.minimum, scan.source, scan.points)


@dataclass(frozen=True)
class KernelReport:
    family: str
    k: int
    M: float
    m: float
    ratio: float
    uniqueness_lhs: float
    threshold: float
    verdict: str
    scan_grid: str

    def to_dict(self) -> dict:
        return asdict(self)


def uniqueness_lhs(ratio: float, k: int) -> float:
    """(M/m)^k - (m/M)^k; ``inf`` when the power overflows."""
    try:
        return ratio ** k - ratio ** (-k)
    except OverflowError:
        return float("inf")


def uniqueness_condition(kernel: Kernel, k: int) -> KernelReport:
    """Check (M/m)^k - (m/M)^k < 1/k.

    When it holds no 2-cycle with f != g exists.  Failure proves nothing,
    hence the verdict ``inconclusive`` rather than an existence claim.
    """
    if k < 2:
        raise ValueError("the condition is stated for k >= 2")
    ex = extremes(kernel)
    ratio = ex.M / ex.m
    lhs = uniqueness_lhs(ratio, k)
    thr = 1.0 / k
    verdict = NO_PERIOD2 if lhs < thr else INCONCLUSIVE
    return KernelReport(kernel.family, int(k), ex.M, ex.m, ratio, lhs, thr, verdict, f"{ex.source}:{ex.points}")


@dataclass(frozen=True)
class BandCheck:
    lower: float
    upper: float
    passed: tuple

    @property
    def ok(self) -> bool:
        return all(self.passed)


def band_limits(M: float, m: float, k: int) -> tuple:
    if k < 2:
        raise ValueError("the band needs k >= 2")
    e = 1.0 / (k - 1)
    return (m / M) * (1.0 / M) ** e, (M / m) * (1.0 / m) ** e


def pk_band(kernel: Kernel, k: int, *functions: GridFunction, ext: Optional[Extremes] = None,
            slack: float = BAND_SLACK) -> BandCheck:
    """Test lower <= f(t_i) <= upper (with ``slack``) for each function."""
    ext = ext or extremes(kernel)
    lo, hi = band_limits(ext.M, ext.m, k)
    flags = []
    for f in functions:
        check_same_rule(kernel, f)
        flags.append(bool(np.all(f.values >= lo - slack) and np.all(f.values <= hi + slack)))
    return BandCheck(lo, hi, tuple(flags))


def range_cone_holds(values: np.ndarray, ext: Extremes) -> bool:
    """M * min(phi) >= m * max(phi) for phi = H_k f sampled anywhere."""
    values = np.asarray(values)
    return bool(ext.M * values.min() >= ext.m * values.max() * (1.0 - 1e-12))


def sign_change(f: GridFunction, g: GridFunction) -> bool:
    """True iff f - g is strictly positive at some node and strictly negative at another."""
    check_same_rule(f, g)
    d = f.values - g.values
    return bool(np.any(d > 0) and np.any(d < 0))


def shift_norm_check(phi: GridFunction, a_samples: Iterable[float]) -> bool:
    """True iff sup|phi - a| >= sup|phi| / 2 for every sampled shift a.

    Raises
    ------
    ValueError
        If ``phi`` does not change sign on the nodes.
    """
    v = phi.values
    if not (np.any(v > 0) and np.any(v < 0)):
        raise ValueError("phi must change sign")
    half = 0.5 * sup_norm(phi)
    a = np.asarray(list(a_samples), dtype=float)
    shifted = np.max(np.abs(v[None, :] - a[:, None]), axis=1)
    return bool(np.all(shifted >= half))
