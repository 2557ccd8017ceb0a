import json

import numpy as np
import pytest

from treegibbs.analysis import NO_PERIOD2, uniqueness_condition
from treegibbs.errors import NonPositiveError
from treegibbs.grid import GridFunction, build_rule, constant, sup_distance
from treegibbs.kernels import build_family, closed_form_pairs, kernel_from_xi, random_symmetric_xi
from treegibbs.operators import H_FORM, CyclePair, hammerstein_to_a
from treegibbs.solver import (
    FIXED_POINT,
    TWO_CYCLE,
    SolverConfig,
    canonical,
    find_cycles,
    iterate_pair,
    verify_catalog,
)


def _a_form_closed(kernel):
    out = []
    for cf in closed_form_pairs(kernel):
        h = CyclePair(kernel.rule.sample(cf.f), kernel.rule.sample(cf.g), cf.k, H_FORM)
        out.append(hammerstein_to_a(kernel, h))
    return out


def _matches(cycle, pair, tol=1e-6):
    d1 = max(sup_distance(cycle.pair.f, pair.f), sup_distance(cycle.pair.g, pair.g))
    d2 = max(sup_distance(cycle.pair.f, pair.g), sup_distance(cycle.pair.g, pair.f))
    return min(d1, d2) < tol


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(k=0)
    with pytest.raises(ValueError):
        SolverConfig(k=2, damping=0.0)
    with pytest.raises(ValueError):
        SolverConfig(k=2, tolerance=1e-3, dedup_radius=1e-4)
    with pytest.raises(ValueError):
        SolverConfig(k=2, tolerance=-1.0)


def test_unit_kernel_converges_immediately(ones_kernel, rng, rule):
    for k in (1, 2, 5):
        out = iterate_pair(ones_kernel, k, GridFunction(rule, 0.1 + rng.random(rule.size)))
        assert out.converged and out.iterations <= 2
        assert np.allclose(out.pair.f.values, 1.0) and np.allclose(out.pair.g.values, 1.0)


def test_nonpositive_start_rejected(ones_kernel, rule):
    with pytest.raises(NonPositiveError):
        iterate_pair(ones_kernel, 2, constant(rule, 0.0))


def test_k3_perturbed_closed_form_returns(k3_kernel, rng):
    exact = _a_form_closed(k3_kernel)[0]
    start = exact.f.values * (1.0 + 0.01 * rng.uniform(-1, 1, exact.f.values.size))
    out = iterate_pair(k3_kernel, 3, start, SolverConfig(k=3, max_iterations=20000))
    assert out.converged
    assert out.hammerstein.max_residual < 1e-6
    assert out.pair.f.at_zero == 1.0 and abs(out.pair.f.values[0] - 1) < 0.1


def test_failure_reasons_reported(four_cycle_kernel, rng, rule):
    start = np.exp(rng.normal(size=rule.size))
    out = iterate_pair(four_cycle_kernel, 100, start, SolverConfig(k=100))
    assert out.status in ("converged", "nonfinite", "nonpositive", "max_iterations")
    capped = iterate_pair(build_family("k3_family", rule), 3, start, SolverConfig(k=3, max_iterations=1))
    assert capped.status == "max_iterations" and capped.pair is None


def test_k2_two_cycle_found(k2_kernel):
    res = find_cycles(k2_kernel, SolverConfig(k=2))
    exact = _a_form_closed(k2_kernel)[0]
    assert any(c.classification == TWO_CYCLE and _matches(c, exact) for c in res.cycles)


def test_four_cycle_solutions(four_cycle_kernel, rule):
    res = find_cycles(four_cycle_kernel, SolverConfig(k=100))
    one = CyclePair(constant(rule, 1.0), constant(rule, 1.0), 100, "a_form_28")
    assert any(c.classification == FIXED_POINT and _matches(c, one) for c in res.cycles)
    for exact in _a_form_closed(four_cycle_kernel):
        assert any(c.classification == TWO_CYCLE and _matches(c, exact) for c in res.cycles)


def test_classification_soundness(k3_kernel, four_cycle_kernel):
    for kern, k in ((k3_kernel, 3), (four_cycle_kernel, 100)):
        cfg = SolverConfig(k=k)
        for c in find_cycles(kern, cfg).cycles:
            if c.classification == TWO_CYCLE:
                assert c.pair.gap >= cfg.dedup_radius and max(c.residuals) < 1e-6
            else:
                assert c.pair.gap < cfg.dedup_radius


def test_pairs_distinct_beyond_radius(four_cycle_kernel):
    cfg = SolverConfig(k=100)
    cycles = find_cycles(four_cycle_kernel, cfg).cycles
    for i, a in enumerate(cycles):
        for b in cycles[i + 1:]:
            assert max(sup_distance(a.pair.f, b.pair.f), sup_distance(a.pair.g, b.pair.g)) >= cfg.dedup_radius


def test_swap_closure(k4_kernel):
    cyc = find_cycles(k4_kernel, SolverConfig(k=4)).two_cycles[0]
    assert canonical(cyc.pair.swapped()).f is cyc.pair.f or np.array_equal(
        canonical(cyc.pair.swapped()).f.values, cyc.pair.f.values)


def test_determinism(k4_kernel):
    cfg = SolverConfig(k=4, seed=11, random_starts=5)
    a = json.dumps(find_cycles(k4_kernel, cfg).to_dict())
    b = json.dumps(find_cycles(k4_kernel, cfg).to_dict())
    assert a == b


def test_threads_give_same_result(k4_kernel):
    a = find_cycles(k4_kernel, SolverConfig(k=4, seed=3)).to_dict()
    b = find_cycles(k4_kernel, SolverConfig(k=4, seed=3, workers=4)).to_dict()
    b["config"]["workers"] = 1
    assert json.dumps(a) == json.dumps(b)


def test_no_period2_kernels_only_have_fixed_points(rng):
    rule = build_rule(60)
    for _ in range(5):
        kern = kernel_from_xi(random_symmetric_xi(rng), 0.01, 1.0, rule)
        assert uniqueness_condition(kern, 3).verdict == NO_PERIOD2
        assert all(c.classification == FIXED_POINT for c in find_cycles(kern, SolverConfig(k=3)).cycles)


def test_linear_case_has_no_two_cycles(rng):
    rule = build_rule(40)
    for _ in range(10):
        kern = kernel_from_xi(random_symmetric_xi(rng, amplitude=2.0), 1.0, 1.0, rule)
        res = find_cycles(kern, SolverConfig(k=1, random_starts=3))
        assert not res.two_cycles
        for out in res.cycles:
            assert out.pair.gap < 1e-6


def test_nonpositive_kernel_rejected():
    with pytest.raises(NonPositiveError):
        find_cycles(build_family("k2_family", build_rule(40), n=1), SolverConfig(k=2))


def test_result_files(tmp_path, k4_kernel):
    res = find_cycles(k4_kernel, SolverConfig(k=4, random_starts=2))
    path = res.write(tmp_path, k4_kernel)
    doc = json.loads(path.read_text())
    assert doc["cycles"] and all((tmp_path / c["file"]).exists() for c in doc["cycles"])
    header = (tmp_path / doc["cycles"][0]["file"]).read_text().splitlines()[0]
    assert header == "t,f,g,Hf,Hg"
    assert len(doc["log"]) == 1 + 4 + 2


@pytest.mark.parametrize("family,params", [
    ("k3_family", {}), ("k_ge4_family", {"k": 4}), ("k2_family", {"n": 2}), ("four_cycle_family", {"k": 100}),
])
def test_verify_catalog_passes_and_refines(family, params):
    rep = verify_catalog(family, params)
    assert rep.positive and rep.passed and rep.refines


def test_verify_catalog_unknown_family():
    with pytest.raises(ValueError):
        verify_catalog("generic_xi", {})
