"""Select the compiled core when available, else the NumPy fallback.

Set ``TREEGIBBS_BACKEND=python`` to force the fallback.
"""
import os

from . import _pycore

NAME = "python"
lowrank_extremes = _pycore.lowrank_extremes
iterate_composed = _pycore.iterate_composed

if os.environ.get("TREEGIBBS_BACKEND", "").lower() != "python":
    try:
        from . import _core
    except ImportError:
        _core = None
    if _core is not None:
        NAME = "compiled"
        lowrank_extremes = _core.lowrank_extremes
        iterate_composed = _core.iterate_composed

STATUS_NAMES = {
    _pycore.CONVERGED: "converged",
    _pycore.MAX_ITERATIONS: "max_iterations",
    _pycore.NONPOSITIVE: "nonpositive",
    _pycore.NONFINITE: "nonfinite",
}
