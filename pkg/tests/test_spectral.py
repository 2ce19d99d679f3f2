import math

import numpy as np
import pytest

import cylpot as cp
from cylpot import (
    DegenerateGroundStateError,
    NotPositiveDefiniteError,
    exponent_ladder,
    heat_kernel,
    heat_kernel_matrix,
)


def test_arc_single_node_eigendata():
    spec = cp.decompose(cp.build_arc(math.pi, 1))
    assert spec.lambda1 == pytest.approx(8.0 / math.pi**2, rel=1e-14)
    assert spec.ground_state[0] == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-14)


def test_arc_fine_ground_state(arc_fine):
    base, spec = arc_fine
    assert abs(spec.lambda1 - 1.0) <= 1e-5
    theta = np.array([lab["angle"] for lab in base.labels])
    model = np.sin(theta)
    scale = spec.ground_state[base.n // 2] / model[base.n // 2]
    rel = np.abs(np.asarray(spec.ground_state, dtype=float) / (scale * model) - 1.0)
    assert np.max(rel) <= 1e-4


@pytest.mark.parametrize("fixture", ["arc_small", "cap_small", "chain_default"])
def test_mass_orthonormality(fixture, request):
    base, spec = request.getfixturevalue(fixture)
    phi = np.asarray(spec.eigenvectors, dtype=float)
    gram = (phi * base.mass[:, None]).T @ phi
    assert np.max(np.abs(gram - np.eye(base.n))) <= 1e-10


@pytest.mark.parametrize("fixture", ["arc_small", "cap_small", "chain_default"])
def test_eigenpair_residuals(fixture, request):
    base, spec = request.getfixturevalue(fixture)
    K = base.stiffness
    phi = np.asarray(spec.eigenvectors, dtype=float)
    lam = np.asarray(spec.eigenvalues, dtype=float)
    resid = K @ phi - (base.mass[:, None] * phi) * lam[None, :]
    norms = np.linalg.norm(resid, axis=0)
    bound = 1e-9 * lam * np.linalg.norm(phi, axis=0)
    assert np.all(norms <= bound)


def test_ground_state_positive_and_gap(chain_default):
    _, spec = chain_default
    assert np.min(spec.ground_state) > 0.0
    assert spec.eigenvalues[1] - spec.eigenvalues[0] > 0.0


def test_degenerate_ground_state_rejected():
    base = cp.build_graph(
        edges=[], mass=[1.0, 1.0], dirichlet_leak=[2.0, 2.0], d=2, b=0.0
    )
    with pytest.raises(DegenerateGroundStateError, match="Perron"):
        cp.decompose(base)


def test_zero_form_rejected():
    base = cp.build_graph(edges=[], mass=[1.0], dirichlet_leak=[0.0], d=2, b=0.0)
    with pytest.raises(NotPositiveDefiniteError):
        cp.decompose(base)


def test_heat_kernel_symmetry(arc_small):
    _, spec = arc_small
    assert heat_kernel(spec, 0.7, 10, 55) == heat_kernel(spec, 0.7, 55, 10)
    with pytest.raises(ValueError):
        heat_kernel(spec, 0.0, 0, 0)


def test_heat_kernel_semigroup_identity(arc_small):
    base, spec = arc_small
    t, s = 0.4, 0.9
    left = heat_kernel_matrix(spec, t) @ np.diag(base.mass) @ heat_kernel_matrix(spec, s)
    right = heat_kernel_matrix(spec, t + s)
    assert np.max(np.abs(left - right)) <= 1e-10 * np.max(np.abs(right))


def test_heat_kernel_positivity_and_subnormalization(arc_small):
    base, spec = arc_small
    rng = np.random.default_rng(0)
    for t in (1e-3, 0.05, 1.0, 7.0, 50.0):
        pi_t = heat_kernel_matrix(spec, t)
        idx = rng.integers(0, base.n, size=60)
        assert np.min(pi_t[idx, idx[::-1]]) >= -1e-12
        row_mass = pi_t @ base.mass
        assert np.max(row_mass) <= 1.0 + 1e-10
        if t >= 1.0:
            assert np.max(row_mass) < 1.0


def test_heat_kernel_ground_state_domination(arc_small):
    _, spec = arc_small
    t = 2.0
    phi = np.asarray(spec.eigenvectors, dtype=float)
    lam = spec.eigenvalues
    for i, j in ((7, 31), (50, 50), (11, 88)):
        val = heat_kernel(spec, t, i, j)
        lhs = abs(val * math.exp(lam[0] * t) / (phi[i, 0] * phi[j, 0]) - 1.0)
        bound = (
            math.exp(-(lam[1] - lam[0]) * t)
            * (spec.n - 1)
            * np.max(np.abs(phi[i, 1:] * phi[j, 1:]))
            / (phi[i, 0] * phi[j, 0])
        )
        assert lhs <= bound


def test_exponent_ladder_closed_forms():
    flat = cp.decompose(
        cp.build_graph(edges=[], mass=[1.0], dirichlet_leak=[1.0], d=2, b=0.0)
    )
    assert exponent_ladder(flat) == pytest.approx((-1.0, 0.0, 1.0, 1.0))
    drift = cp.decompose(
        cp.build_graph(edges=[], mass=[1.0], dirichlet_leak=[3.0], d=4, b=2.0)
    )
    assert exponent_ladder(drift) == pytest.approx((-3.0, -1.0, 1.0, 3.0))


def test_exponent_ladder_hemisphere(cap_hemi4):
    _, spec = cap_hemi4
    ladder = exponent_ladder(spec)
    assert abs(ladder.alpha_max - 1.0) <= 1e-4
    assert ladder.alpha_min < ladder.alpha_zero < ladder.alpha_max


@pytest.mark.parametrize("fixture", ["arc_small", "cap_small", "chain_default"])
def test_alpha_root_relation(fixture, request):
    _, spec = request.getfixturevalue(fixture)
    lam1 = spec.lambda1
    for alpha in (spec.alpha_max, spec.alpha_min):
        assert abs(alpha * (alpha + spec.b) - lam1) <= 1e-12 * max(1.0, lam1)
    assert np.all(spec.mu > 0.0)


def test_decompose_deterministic(arc_small):
    base, spec = arc_small
    again = cp.decompose(base)
    assert np.array_equal(np.asarray(spec.eigenvalues), np.asarray(again.eigenvalues))
    assert np.array_equal(np.asarray(spec.eigenvectors), np.asarray(again.eigenvectors))


def test_refinement_consistent_with_plain_solve(chain_default):
    base, refined = chain_default
    plain = cp.decompose(base, refine_low_band=False)
    lam_r = np.asarray(refined.eigenvalues, dtype=float)
    lam_p = np.asarray(plain.eigenvalues, dtype=float)
    assert np.max(np.abs(lam_r - lam_p) / (1.0 + lam_p)) <= 1e-10
    low = lam_p <= 5.0
    phi_r = np.asarray(refined.eigenvectors, dtype=float)[:, low]
    phi_p = np.asarray(plain.eigenvectors, dtype=float)[:, low]
    assert np.max(np.abs(phi_r - phi_p)) <= 1e-7 * np.max(np.abs(phi_p))
