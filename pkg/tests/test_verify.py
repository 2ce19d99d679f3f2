import math

import numpy as np
import pytest

import cylpot as cp
from cylpot import CylinderPoint as P, GreenEvaluator
from cylpot.verify import (
    UnknownSuiteError,
    check_boundary_harnack,
    check_green_monotonicity,
    check_iu_ratio,
    check_ratio_limit,
    check_reflection,
    check_small_time_ratio,
    check_symmetry_identity,
    run_suite,
)


def _evaluator(pair):
    base, spec = pair
    return GreenEvaluator(spec=spec, base=base)


def test_monotonicity_sweep_passes(arc_small):
    ev = _evaluator(arc_small)
    rep = check_green_monotonicity(ev, count=2000, seed=5)
    assert rep.passed and rep.max_violation <= 1e-12
    assert rep.sample_count == 2000


def test_monotonicity_explicit_samples_and_edge_cases(arc_small):
    ev = _evaluator(arc_small)
    # rho -> 0 equality and the two-branch sandwich at v = u + rho/2.
    rep = check_green_monotonicity(
        ev, samples=[(0.5, 1.0, 1.0, 20, 70), (0.0, 0.0, 1e-9, 10, 10)]
    )
    assert rep.max_violation <= 1e-12
    with pytest.raises(ValueError):
        check_green_monotonicity(ev, samples=[])


def test_symmetry_identity_sweep(cap_small):
    ev = _evaluator(cap_small)
    rep = check_symmetry_identity(ev, count=2000, seed=6)
    assert rep.passed and rep.max_violation <= 1e-12


def test_harnack_single_mode_constant(one_node):
    ev = _evaluator(one_node)
    rep = check_boundary_harnack(ev)
    mu1 = math.sqrt(float(ev.spec.mu[0]))
    expect = max(2 * mu1, 1.0 / (2 * mu1))
    assert rep.empirical_constant == pytest.approx(expect, rel=1e-12)
    assert rep.max_violation <= 1e-12


def test_harnack_stability_on_arc(arc_small):
    ev = _evaluator(arc_small)
    rep = check_boundary_harnack(ev, grid_max=10)
    assert rep.passed  # drift under grid doubling within 5%
    assert rep.empirical_constant >= 1.0


def test_iu_ratio_on_arc(arc_small):
    base, spec = arc_small
    rep = check_iu_ratio(spec, probe_node=base.n // 3)
    lam = np.asarray(spec.eigenvalues, dtype=float)
    assert rep.rate.expected == pytest.approx(-(lam[1] - lam[0]))
    assert rep.rate.rel_deviation <= 0.10
    assert np.all(np.asarray(rep.extras["c_values"]) >= 1.0)
    assert rep.extras["tail_gap"] <= 1e-8
    assert rep.extras["tail_t"] == pytest.approx(50.0, rel=0.01)


def test_iu_ratio_grid_validation(arc_small):
    _, spec = arc_small
    with pytest.raises(ValueError):
        check_iu_ratio(spec, probe_node=3, t_grid=np.array([2.0, 1.0]))


def test_small_time_single_mode_flat(one_node):
    _, spec = one_node
    rep = check_small_time_ratio(spec, lam=0.3, t0=1.7, x=0, y_sequence=[0, 0, 0])
    want = -math.expm1(-(spec.lambda1 + 0.3) * 1.7)
    assert np.allclose(rep.extras["ratios"], want, rtol=1e-12)
    assert rep.extras["is_decreasing"]


def test_small_time_arc_bounded_below(arc_small):
    base, spec = arc_small
    rep = check_small_time_ratio(
        spec, lam=0.0, t0=1.0, x=base.reference_node, y_sequence=np.arange(base.n)
    )
    assert rep.extras["min_ratio"] >= 0.2


def test_small_time_requires_positive_shift(one_node):
    _, spec = one_node
    with pytest.raises(ValueError):
        check_small_time_ratio(spec, lam=-10.0, t0=1.0, x=0, y_sequence=[0])


def test_small_time_chain_collapses_at_the_end(chain_default):
    base, spec = chain_default
    centers = cp.chain_bead_centers(base)
    rep = check_small_time_ratio(
        spec, lam=0.0, t0=1.0, x=base.reference_node, y_sequence=centers
    )
    ratios = np.asarray(rep.extras["ratios"], dtype=float)
    assert rep.extras["is_decreasing"]
    assert ratios[-1] <= 0.05 * ratios[4]


def test_ratio_limit_trivial_cases(arc_small, cap_small):
    base_a, spec_a = arc_small
    nodes = [10, 40, 90]
    rep = check_ratio_limit(spec_a, b=0.0, rho=1.3, rho_prime=-1.3, x=50, y_sequence=nodes)
    assert np.allclose(rep.extras["ratios"], 1.0, rtol=1e-12)
    base_c, spec_c = cap_small
    rep2 = check_ratio_limit(spec_c, b=2.0, rho=0.8, rho_prime=0.8, x=150, y_sequence=nodes)
    assert np.allclose(rep2.extras["ratios"], math.exp(0.0), rtol=1e-12)


def test_ratio_limit_chain_converges(chain_default):
    base, spec = chain_default
    centers = cp.chain_bead_centers(base)
    rep = check_ratio_limit(
        spec, b=2.0, rho=1.0, rho_prime=0.0, x=base.reference_node,
        y_sequence=centers, base=base,
    )
    devs = np.asarray(rep.extras["deviations"], dtype=float)
    assert rep.extras["final_deviation"] <= 0.10
    assert np.all(np.diff(devs[20:]) <= 1e-9)  # settles along the deep half


def test_reflection_exactness_and_fixed_nodes(arc_sym):
    ev = _evaluator(arc_sym)
    rep = check_reflection(ev, count=2000, seed=3)
    assert rep.passed and rep.max_violation <= 1e-12
    sigma = ev.base.symmetry
    center = int(np.nonzero(sigma == np.arange(ev.spec.n))[0][0])
    pole = P(1.0, 30)
    lhs = ev.log_green(P(-2.0, center), pole)
    rhs = ev.log_green(P(-2.0, int(sigma[center])), pole)
    assert lhs == rhs


def test_reflection_skipped_without_symmetry(cap_small):
    ev = _evaluator(cap_small)
    rep = check_reflection(ev)
    assert rep.status == "skipped" and rep.passed


def test_reflection_constant_stable_under_refinement(arc_sym):
    ev = _evaluator(arc_sym)
    c1 = check_reflection(ev, count=2000, seed=3).empirical_constant
    c2 = check_reflection(ev, count=4000, seed=3).empirical_constant
    assert abs(c2 / c1 - 1.0) <= 0.10


def test_run_suite_all_on_arc(arc_small):
    ev = _evaluator(arc_small)
    reports = run_suite(ev, ("all",), config={"count": 1500}, seed=21)
    assert set(reports) == set(
        ("monotonicity", "symmetry", "normalization", "harnack",
         "iu_ratio", "small_time", "ratio_limit", "reflection")
    )
    for name, rep in reports.items():
        assert rep.passed, f"{name}: {rep.max_violation} vs {rep.tolerance}"
    for name in ("monotonicity", "symmetry", "normalization", "reflection"):
        assert reports[name].max_violation <= 1e-12
    assert reports["iu_ratio"].rate is not None


def test_run_suite_all_on_chain(chain_default):
    ev = _evaluator(chain_default)
    reports = run_suite(ev, ("all",), config={"count": 800}, seed=13)
    for name, rep in reports.items():
        assert rep.passed, f"{name}: {rep.max_violation} vs {rep.tolerance}"
    # Deep pairs are skipped by the exactness sweeps, not asserted blindly.
    assert reports["monotonicity"].extras["skipped_unresolvable"] > 0
    assert reports["reflection"].status == "skipped"
    assert reports["iu_ratio"].rate.rel_deviation <= 0.10


def test_run_suite_empty_and_unknown(arc_small):
    ev = _evaluator(arc_small)
    assert run_suite(ev, ()) == {}
    with pytest.raises(UnknownSuiteError):
        run_suite(ev, ("does-not-exist",))


def test_run_suite_deterministic(arc_small):
    ev = _evaluator(arc_small)
    a = run_suite(ev, ("monotonicity", "symmetry"), config={"count": 800}, seed=9)
    b = run_suite(ev, ("monotonicity", "symmetry"), config={"count": 800}, seed=9)
    for name in a:
        assert a[name].max_violation == b[name].max_violation
        assert a[name].to_dict() == b[name].to_dict()


def test_suite_error_isolation(arc_small, monkeypatch):
    ev = _evaluator(arc_small)

    def boom(*args, **kwargs):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr("cylpot.verify.check_boundary_harnack", boom)
    reports = run_suite(ev, ("harnack", "normalization"), seed=1)
    assert reports["harnack"].status == "error" and not reports["harnack"].passed
    assert reports["normalization"].passed


def test_report_serialization(arc_small):
    ev = _evaluator(arc_small)
    rep = check_green_monotonicity(ev, count=500, seed=2)
    d = rep.to_dict()
    assert d["suite"] == "monotonicity" and d["passed"] is True
    assert isinstance(d["max_violation"], float)
