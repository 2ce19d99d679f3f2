"""Exact convolution of two-point delay measures and a Chernoff threshold.

Each step k contributes the measure (1/2) delta_0 + (1/2) delta_{-a_k} with
0 <= a_k <= 1; the convolution is the law of Z = -sum_k a_k X_k for
independent fair 0/1 variables X_k.  The near-zero tail nu([-L, 0]) obeys

    nu([-L, 0]) <= e^{beta L} prod_k (1 - (1 - e^{-beta a_k})/2)
                <= e^{beta L} exp(-(beta/2) e^{-beta} sum_k a_k)

for every beta > 0, so a total delay sum above the threshold returned by
``chernoff_threshold`` pins the tail under the requested epsilon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "ConvolutionCapacityError",
    "DiscreteDistribution",
    "exact_convolution",
    "tail_mass",
    "chernoff_bound",
    "chernoff_threshold",
    "chernoff_threshold_details",
    "ChernoffThreshold",
    "ENUMERATION_LIMIT",
]

ENUMERATION_LIMIT = 25
_MERGE_TOL = 1e-12
_GRID_DENOMINATOR_CAP = 10_000
_GRID_POINT_CAP = 5_000_000


class ConvolutionCapacityError(ValueError):
    """Too many factors for exact enumeration and no common rational grid."""


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite probability measure with non-positive support points.

    support is strictly increasing, probabilities are positive, and the
    total mass is 1 to within 1e-12.
    """

    support: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=float)
        p = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "probabilities", p)
        if s.ndim != 1 or s.shape != p.shape or s.size == 0:
            raise ValueError("support and probabilities must be matching 1-D arrays")
        if np.any(np.diff(s) <= 0.0):
            raise ValueError("support points must be strictly increasing")
        if np.any(s > 0.0):
            raise ValueError("support points must be <= 0")
        if np.any(p <= 0.0):
            raise ValueError("atom probabilities must be positive")
        if abs(float(np.sum(p)) - 1.0) > 1e-12:
            raise ValueError("atom probabilities must sum to 1 within 1e-12")

    @property
    def atom_count(self) -> int:
        return self.support.size

    def as_rows(self):
        return list(zip(self.support.tolist(), self.probabilities.tolist()))


def _merge_atoms(support: np.ndarray, probs: np.ndarray) -> DiscreteDistribution:
    order = np.argsort(support)
    s, p = support[order], probs[order]
    merged_s = [s[0]]
    merged_p = [p[0]]
    for x, q in zip(s[1:], p[1:]):
        if x - merged_s[-1] <= _MERGE_TOL:
            merged_p[-1] += q
        else:
            merged_s.append(x)
            merged_p.append(q)
    # + 0.0 normalizes -0.0 support points.
    return DiscreteDistribution(np.asarray(merged_s) + 0.0, np.asarray(merged_p))


def _common_grid(a: np.ndarray):
    """Least common rational step of the delays, or None."""
    denoms = []
    for x in a:
        if x == 0.0:
            continue
        frac = Fraction(x).limit_denominator(_GRID_DENOMINATOR_CAP)
        if abs(float(frac) - x) > _MERGE_TOL:
            return None
        denoms.append(frac.denominator)
    if not denoms:
        return 1.0  # all delays zero; any grid works
    lcm = 1
    for d in denoms:
        lcm = lcm * d // math.gcd(lcm, d)
        if lcm > _GRID_DENOMINATOR_CAP:
            return None
    step = 1.0 / lcm
    if float(np.sum(a)) / step > _GRID_POINT_CAP:
        return None
    return step


def exact_convolution(a: Sequence[float]) -> DiscreteDistribution:
    """Exact law of Z = -sum_k a_k X_k, X_k independent fair 0/1 coins.

    Delays on a common rational grid are convolved by dynamic programming
    over that grid (any length); otherwise plain atom enumeration handles up
    to ENUMERATION_LIMIT factors.  Atoms within 1e-12 of each other merge.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError("delays must form a 1-D sequence")
    if np.any((a < 0.0) | (a > 1.0)):
        raise ValueError("delays must lie in [0, 1]")
    if a.size == 0:
        return DiscreteDistribution(np.array([0.0]), np.array([1.0]))

    step = _common_grid(a)
    if step is not None:
        ticks = np.rint(a / step).astype(np.int64)
        total = int(np.sum(ticks))
        pmf = np.zeros(total + 1)
        pmf[0] = 1.0
        top = 0
        for k in ticks:
            if k == 0:
                continue
            shifted = np.zeros_like(pmf)
            shifted[k : top + k + 1] = pmf[: top + 1]
            pmf[: top + k + 1] = 0.5 * pmf[: top + k + 1] + 0.5 * shifted[: top + k + 1]
            top += k
        keep = pmf > 0.0
        support = -step * np.arange(total + 1)[keep]
        return _merge_atoms(support, pmf[keep])

    if a.size > ENUMERATION_LIMIT:
        raise ConvolutionCapacityError(
            f"{a.size} factors exceed the enumeration limit of "
            f"{ENUMERATION_LIMIT} and the delays share no rational grid"
        )
    support = np.array([0.0])
    probs = np.array([1.0])
    for delay in a:
        support = np.concatenate([support, support - delay])
        probs = np.concatenate([0.5 * probs, 0.5 * probs])
        dist = _merge_atoms(support, probs)
        support, probs = dist.support, dist.probabilities
    return DiscreteDistribution(support, probs)


def tail_mass(dist: DiscreteDistribution, L: float) -> float:
    """Mass of the closed interval [-L, 0]; atoms exactly at -L count."""
    if L <= 0.0:
        raise ValueError("tail length L must be positive")
    mask = dist.support >= -L - _MERGE_TOL
    return float(np.sum(dist.probabilities[mask]))


def chernoff_bound(a: Sequence[float], L: float, beta: float) -> float:
    """Exponential-moment bound e^{beta L} prod_k (1 - (1 - e^{-beta a_k})/2).

    Dominates tail_mass(exact_convolution(a), L) for every beta > 0.
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    a = np.asarray(a, dtype=float)
    log_factors = np.log1p(0.5 * np.expm1(-beta * a))
    return math.exp(beta * L + float(np.sum(log_factors)))


class ChernoffThreshold(NamedTuple):
    threshold: float
    beta: float


def chernoff_threshold_details(
    L: float, eps: float, beta_grid_step: float = 1e-3, beta_max: float = 5.0
) -> ChernoffThreshold:
    """Threshold A(L, eps) with the grid-optimal beta that certified it.

    Uses the simplified bound e^{beta L} exp(-(beta/2) e^{-beta} sum a_k),
    valid for delays a_k <= 1: the bound drops below eps once
    sum a_k >= (log(1/eps) + beta L) * 2 e^{beta} / beta.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if L <= 0.0:
        raise ValueError("L must be positive")
    betas = np.arange(beta_grid_step, beta_max + 0.5 * beta_grid_step, beta_grid_step)
    need = (math.log(1.0 / eps) + betas * L) * 2.0 * np.exp(betas) / betas
    best = int(np.argmin(need))
    return ChernoffThreshold(threshold=float(need[best]), beta=float(betas[best]))


def chernoff_threshold(L: float, eps: float) -> float:
    """A = A(L, eps): sum a_k >= A forces tail_mass(..., L) <= eps."""
    return chernoff_threshold_details(L, eps).threshold
