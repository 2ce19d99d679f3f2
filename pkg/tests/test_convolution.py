import math

import numpy as np
import pytest

from cylpot import (
    ConvolutionCapacityError,
    chernoff_bound,
    chernoff_threshold,
    chernoff_threshold_details,
    exact_convolution,
    tail_mass,
)


def test_all_zero_delays_is_point_mass():
    dist = exact_convolution([0.0, 0.0, 0.0])
    assert dist.support.tolist() == [0.0]
    assert dist.probabilities.tolist() == [1.0]
    assert tail_mass(dist, 5.0) == 1.0


def test_unit_delays_give_shifted_binomial():
    dist = exact_convolution([1.0] * 20)
    assert dist.atom_count == 21
    assert np.array_equal(dist.support, -np.arange(20, -1, -1.0))
    assert dist.probabilities[-1] == 0.5**20  # atom at 0
    # Exact tail over [-2, 0]: C(20,0)+C(20,1)+C(20,2) coin patterns.
    assert tail_mass(dist, 2.0) == 211 / 2**20


def test_grid_dp_matches_enumeration():
    delays = [0.5] * 10
    grid = exact_convolution(delays)
    # Force the enumeration route by making the values grid-hostile copies.
    eps = 1e-13  # inside the atom-merge tolerance
    enum = exact_convolution([0.5 + eps * ((-1) ** k) for k in range(10)])
    assert grid.atom_count == enum.atom_count == 11
    assert np.allclose(grid.support, enum.support, atol=1e-11)
    assert np.allclose(grid.probabilities, enum.probabilities, rtol=1e-12)
    assert abs(float(np.sum(grid.probabilities)) - 1.0) <= 1e-12


def test_permutation_invariance():
    rng = np.random.default_rng(8)
    delays = rng.integers(1, 9, size=12) / 8.0
    a = exact_convolution(delays)
    b = exact_convolution(delays[::-1])
    assert np.allclose(a.support, b.support, atol=1e-12)
    assert np.allclose(a.probabilities, b.probabilities, rtol=1e-12)


def test_capacity_error_without_common_grid():
    rng = np.random.default_rng(1)
    delays = rng.uniform(0.1, 0.9, size=30)
    with pytest.raises(ConvolutionCapacityError):
        exact_convolution(delays)


def test_delay_validation():
    with pytest.raises(ValueError):
        exact_convolution([0.5, 1.5])
    with pytest.raises(ValueError):
        exact_convolution([-0.1])


def test_tail_mass_edges():
    dist = exact_convolution([1.0] * 4)
    assert tail_mass(dist, 10.0) == 1.0  # interval swallows the support
    assert tail_mass(dist, 1.0) == (1 + 4) / 16
    with pytest.raises(ValueError):
        tail_mass(dist, 0.0)


def test_chernoff_bound_formula_and_soundness():
    delays = [1.0] * 20
    beta, L = 1.0, 2.0
    want = math.exp(beta * L) * (1 - (1 - math.exp(-beta)) / 2) ** 20
    assert chernoff_bound(delays, L, beta) == pytest.approx(want, rel=1e-12)
    exact = tail_mass(exact_convolution(delays), L)
    assert chernoff_bound(delays, L, beta) >= exact
    rng = np.random.default_rng(5)
    for _ in range(10):
        d = rng.integers(0, 9, size=25) / 8.0
        exact = tail_mass(exact_convolution(d), 1.5)
        best = min(chernoff_bound(d, 1.5, b) for b in np.arange(0.05, 5.0, 0.05))
        assert exact <= best + 1e-12


def test_chernoff_bound_limits():
    assert chernoff_bound([0.7, 0.3], 2.0, 1e-9) == pytest.approx(1.0, abs=1e-6)
    assert chernoff_bound([0.0, 1.0], 1.0, 2.0) == pytest.approx(
        math.exp(2.0) * (1 - (1 - math.exp(-2.0)) / 2), rel=1e-12
    )
    with pytest.raises(ValueError):
        chernoff_bound([0.5], 1.0, 0.0)


def test_threshold_monotonicity_and_guarantee():
    grid_L = [0.5, 1.0, 2.0, 4.0]
    grid_eps = [0.2, 0.05, 0.01, 0.001]
    for eps in grid_eps:
        vals = [chernoff_threshold(L, eps) for L in grid_L]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
    for L in grid_L:
        vals = [chernoff_threshold(L, eps) for eps in grid_eps]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
    # Direct guarantee: the simplified bound at the certified beta equals eps.
    thr = chernoff_threshold_details(2.0, 0.01)
    simplified = math.exp(thr.beta * 2.0) * math.exp(
        -0.5 * thr.beta * math.exp(-thr.beta) * thr.threshold
    )
    assert simplified == pytest.approx(0.01, rel=1e-9)


def test_threshold_degenerate_eps():
    val = chernoff_threshold(2.0, 1.0 - 1e-9)
    assert 0.0 < val < math.inf
    with pytest.raises(ValueError):
        chernoff_threshold(2.0, 1.0)
    with pytest.raises(ValueError):
        chernoff_threshold(2.0, 0.0)


def test_threshold_pins_exact_tail():
    A = chernoff_threshold(2.0, 0.01)
    rng = np.random.default_rng(17)
    for _ in range(10):
        delays = []
        while sum(delays) < A:
            delays.append(int(rng.integers(1, 9)) / 8.0)
        assert tail_mass(exact_convolution(delays), 2.0) <= 0.01
