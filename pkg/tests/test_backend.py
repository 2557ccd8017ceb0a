"""The compiled core and the NumPy fallback must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treegibbs import _backend, _pycore
from treegibbs.grid import build_rule
from treegibbs.kernels import build_family

core = pytest.importorskip("treegibbs._core")


def test_default_backend_is_compiled():
    assert _backend.NAME == "compiled"


def test_env_forces_python():
    code = "import treegibbs._backend as b; print(b.NAME)"
    env = dict(os.environ, TREEGIBBS_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5), st.integers(1, 60), st.integers(1, 60))
def test_lowrank_extremes_agree(seed, rank, ni, nj):
    rng = np.random.default_rng(seed)
    left, right = rng.normal(size=(rank, ni)), rng.normal(size=(rank, nj))
    a, b = _pycore.lowrank_extremes(left, right), core.lowrank_extremes(left, right)
    assert a[0] == pytest.approx(b[0], rel=1e-13, abs=1e-13)
    assert a[1] == pytest.approx(b[1], rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("family,params,k", [("k3_family", {}, 3), ("k_ge4_family", {"k": 6}, 6),
                                             ("four_cycle_family", {"k": 100}, 100)])
def test_iteration_agrees(family, params, k):
    kern = build_family(family, build_rule(120), **params)
    rng = np.random.default_rng(5)
    for _ in range(3):
        f0 = np.exp(0.3 * rng.normal(size=120))
        a = _pycore.iterate_composed(kern.weighted, kern.zero_weighted, f0, k, 1.0, 1e-10, 3000, 1e100)
        b = core.iterate_composed(kern.weighted, kern.zero_weighted, f0, k, 1.0, 1e-10, 3000, 1e100)
        assert a[3] == b[3]
        if a[1] is not None:
            assert abs(a[2] - b[2]) <= 2
            assert np.allclose(a[0], b[0], rtol=1e-8, atol=0)
            assert np.allclose(a[1], b[1], rtol=1e-8, atol=0)


def test_oscillation_triggers_damping():
    # small nonsymmetric system whose composed map overshoots: steps alternate in sign
    kw = np.array([[0.716, 0.901, 0.342], [0.239, 0.822, 0.585], [0.477, 0.256, 0.073]])
    zw = np.array([0.018, 0.58, 0.191])
    f0 = np.array([1.076, 0.207, 0.552])
    py = _pycore.iterate_composed(kw, zw, f0, 3, 1.0, 1e-12, 2000, 1e100)
    cc = core.iterate_composed(kw, zw, f0, 3, 1.0, 1e-12, 2000, 1e100)
    for out in (py, cc):
        assert out[3] == _pycore.CONVERGED
        assert out[4] == _pycore.FALLBACK_DAMPING
    assert py[2] == cc[2]
    assert np.allclose(py[0], cc[0], rtol=1e-12)
