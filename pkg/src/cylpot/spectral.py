"""Generalized eigendecomposition, heat kernel, and the exponent ladder.

For a base operator (K, M) the eigenpairs solve K phi = lam M phi with
mass-orthonormal eigenvectors.  The Dirichlet heat kernel density is the
eigenexpansion pi_t(i, j) = sum_k exp(-lam_k t) phi_k(i) phi_k(j), and the
admissible axial growth rates of separated positive solutions on the cylinder
are the roots of alpha**2 + b*alpha = lam_1:

    alpha_min < alpha_zero = -b/2 < alpha_max,
    alpha_max = (-b + sqrt(b**2 + 4*lam_1)) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from .base import BaseOperator

__all__ = [
    "SpectralError",
    "EigensolverError",
    "DegenerateGroundStateError",
    "NotPositiveDefiniteError",
    "SpectralData",
    "ExponentLadder",
    "decompose",
    "heat_kernel",
    "heat_kernel_matrix",
    "exponent_ladder",
]

# Relative spectral gap below which lam_1 is treated as degenerate.
_PERRON_GAP_TOL = 1e-12


class SpectralError(RuntimeError):
    """Base class for eigendecomposition failures."""


class EigensolverError(SpectralError):
    """The eigensolver produced eigenpairs with unacceptable residuals."""


class DegenerateGroundStateError(SpectralError):
    """lam_1 is not simple, violating Perron simplicity of the ground state."""


class NotPositiveDefiniteError(SpectralError):
    """The quadratic form is not positive definite (lam_1 <= 0)."""


@dataclass(frozen=True)
class SpectralData:
    """Full generalized eigensystem of a base operator.

    eigenvalues are ascending, eigenvectors[:, k] is the k-th mode, and
    sum_i mass[i] * phi_k[i] * phi_l[i] = delta_kl.  The ground state
    eigenvectors[:, 0] is entrywise positive.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    mass: np.ndarray
    b: float

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def ground_state(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def mu(self) -> np.ndarray:
        """Shifted rates mu_k = lam_k + b**2/4 (all positive here)."""
        return self.eigenvalues + 0.25 * self.b * self.b

    @property
    def alpha_max(self) -> float:
        return 0.5 * (-self.b + math.sqrt(self.b * self.b + 4.0 * self.lambda1))

    @property
    def alpha_min(self) -> float:
        return 0.5 * (-self.b - math.sqrt(self.b * self.b + 4.0 * self.lambda1))

    @property
    def alpha_zero(self) -> float:
        return -0.5 * self.b

    def alpha_plus(self) -> np.ndarray:
        """Per-mode growing axial rate -b/2 + sqrt(mu_k)."""
        return -0.5 * self.b + np.sqrt(self.mu)

    def alpha_minus(self) -> np.ndarray:
        """Per-mode decaying axial rate -b/2 - sqrt(mu_k)."""
        return -0.5 * self.b - np.sqrt(self.mu)


class ExponentLadder(NamedTuple):
    alpha_min: float
    alpha_zero: float
    alpha_max: float
    lambda1: float


def _tridiagonal_parts(A: np.ndarray):
    d = np.diag(A).copy()
    e = np.diag(A, k=1).copy()
    return d, e


def _solve_shifted_tridiagonal(
    diag: np.ndarray, off: np.ndarray, shift, rhs: np.ndarray
) -> np.ndarray:
    """Solve (T - shift*I) z = rhs for symmetric tridiagonal T, in the dtype
    of the inputs, with partial pivoting (the shift sits next to an
    eigenvalue, so the system is deliberately near-singular)."""
    n = diag.shape[0]
    dt = diag.dtype
    b = (diag - shift).astype(dt, copy=True)  # col i of row i
    c = np.zeros(n, dtype=dt)                 # col i+1 of row i
    c[: n - 1] = off
    c2 = np.zeros(n, dtype=dt)                # col i+2 fill-in
    x = rhs.astype(dt, copy=True)
    tiny = np.finfo(dt).tiny * 1e8
    for i in range(n - 1):
        sub = off[i]
        if abs(sub) > abs(b[i]):
            b[i], sub = sub, b[i]
            c[i], b[i + 1] = b[i + 1], c[i]
            c2[i], c[i + 1] = c[i + 1], c2[i]
            x[i], x[i + 1] = x[i + 1], x[i]
        piv = b[i] if b[i] != 0 else tiny
        m = sub / piv
        b[i + 1] = b[i + 1] - m * c[i]
        c[i + 1] = c[i + 1] - m * c2[i]
        x[i + 1] = x[i + 1] - m * x[i]
    z = np.empty(n, dtype=dt)
    z[n - 1] = x[n - 1] / (b[n - 1] if b[n - 1] != 0 else tiny)
    if n > 1:
        z[n - 2] = (x[n - 2] - c[n - 2] * z[n - 1]) / (b[n - 2] if b[n - 2] != 0 else tiny)
    for i in range(n - 3, -1, -1):
        z[i] = (x[i] - c[i] * z[i + 1] - c2[i] * z[i + 2]) / (b[i] if b[i] != 0 else tiny)
    return z


def _refine_low_band(diag, off, vals, psi, cutoff: float):
    """Rayleigh-quotient refinement of eigenpairs with lam <= cutoff in
    80-bit arithmetic.

    Deep-separation Green evaluations cancel down to ~exp(-30) of the term
    magnitudes, which double-precision eigenvectors cannot support; two
    inverse-iteration steps per low mode push the eigenpair noise below the
    longdouble working precision.  High modes never matter there (their
    axial decay rates are huge), so they stay as solved.
    """
    ld = np.longdouble
    dL = diag.astype(ld)
    eL = off.astype(ld)
    vals_out = vals.astype(ld)
    psi_out = psi.astype(ld)
    n = diag.shape[0]

    def tri_mv(v):
        out = dL * v
        out[:-1] += eL * v[1:]
        out[1:] += eL * v[:-1]
        return out

    for k in range(n):
        if vals[k] > cutoff:
            break
        v = psi_out[:, k]
        v = v / np.sqrt(v @ v)
        lam = v @ tri_mv(v)
        for _ in range(2):
            z = _solve_shifted_tridiagonal(dL, eL, lam, v)
            top = np.max(np.abs(z))
            if not np.isfinite(top) or top == 0.0:
                break
            z = z / top  # guard the norm against overflow at tiny residuals
            v = z / np.sqrt(z @ z)
            lam = v @ tri_mv(v)
        # Defensive: a Rayleigh iteration that wandered to a different
        # eigenvalue is discarded.
        if abs(float(lam) - vals[k]) <= 1e-6 * (1.0 + abs(vals[k])):
            if v @ psi_out[:, k] < 0:
                v = -v
            vals_out[k] = lam
            psi_out[:, k] = v
    return vals_out, psi_out


def decompose(
    base: BaseOperator,
    residual_tol: float = 1e-6,
    refine_low_band: Optional[bool] = None,
    refine_cutoff: float = 50.0,
) -> SpectralData:
    """Solve the full generalized eigensystem of (stiffness, diag(mass)).

    Uses the symmetric similarity A = M^(-1/2) K M^(-1/2), which stays
    tridiagonal for the path-structured builders and is then solved by the
    dedicated tridiagonal routine; otherwise a dense solve is used.

    ``refine_low_band`` reruns the eigenpairs below ``refine_cutoff``
    through extended-precision Rayleigh-quotient iteration; the default
    (None) turns this on exactly for chain bases, whose deep-separation
    Green sums need the extra digits.

    Raises
    ------
    EigensolverError
        if any eigenpair residual exceeds ``residual_tol`` relative to the
        operator scale (the offending residual norms are reported).
    DegenerateGroundStateError
        if lam_2 - lam_1 <= 1e-12 * max(1, lam_1).
    NotPositiveDefiniteError
        if lam_1 <= 0, i.e. the complement of the base is effectively polar.
    """
    K = base.stiffness
    m = base.mass
    s = 1.0 / np.sqrt(m)
    # The solvers below read a single triangle, so exact symmetry of the
    # scaled matrix is not load-bearing.
    A = (K * s[None, :]) * s[:, None]
    tridiagonal = base.is_tridiagonal
    if refine_low_band is None:
        refine_low_band = tridiagonal and base.kind == "chain"
    if tridiagonal:
        diag, off = _tridiagonal_parts(A)
        vals, psi = scipy.linalg.eigh_tridiagonal(diag, off)
        if refine_low_band:
            vals, psi = _refine_low_band(diag, off, vals, psi, refine_cutoff)
            s = s.astype(np.longdouble)
    else:
        if refine_low_band:
            raise EigensolverError("low-band refinement requires a tridiagonal base")
        vals, psi = scipy.linalg.eigh(A)
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    phi = s[:, None] * psi[:, order]

    # Deterministic sign convention: largest-magnitude entry positive.
    idx = np.argmax(np.abs(phi), axis=0)
    signs = np.sign(phi[idx, np.arange(phi.shape[1])])
    signs[signs == 0] = 1.0
    phi = phi * signs[None, :]

    resid = K @ phi - (m[:, None] * phi) * vals[None, :]
    scale = np.abs(vals) * np.linalg.norm(phi, axis=0) + np.linalg.norm(K, ord=np.inf)
    worst = np.max(np.linalg.norm(resid, axis=0) / np.maximum(scale, 1e-300))
    if not np.isfinite(worst) or worst > residual_tol:
        raise EigensolverError(
            f"eigensolver residuals too large: worst relative residual {worst:.3e}"
        )

    if vals[0] <= 0.0:
        raise NotPositiveDefiniteError(
            f"smallest generalized eigenvalue {vals[0]:.6e} is not positive; "
            "the base violates the standing non-polarity assumption"
        )
    if len(vals) > 1 and vals[1] - vals[0] <= _PERRON_GAP_TOL * max(1.0, vals[0]):
        raise DegenerateGroundStateError(
            f"spectral gap {vals[1] - vals[0]:.3e} below tolerance: the ground "
            "eigenvalue must be simple (Perron simplicity violated)"
        )
    if np.min(phi[:, 0]) <= 0.0:
        # Perron theory forbids this for connected bases; fail loudly.
        raise EigensolverError("ground state is not entrywise positive")

    return SpectralData(eigenvalues=vals, eigenvectors=phi, mass=m.copy(), b=base.b)


def heat_kernel(spec: SpectralData, t: float, i: int, j: int) -> float:
    """Dirichlet heat kernel density pi_t(i, j) against the mass weights."""
    if t <= 0.0:
        raise ValueError("heat kernel requires t > 0")
    w = np.exp(-spec.eigenvalues * t)
    return float(np.dot(spec.eigenvectors[i] * spec.eigenvectors[j], w))


def heat_kernel_matrix(spec: SpectralData, t: float) -> np.ndarray:
    """All-pairs heat kernel pi_t as an (n, n) matrix."""
    if t <= 0.0:
        raise ValueError("heat kernel requires t > 0")
    w = np.exp(-spec.eigenvalues * t)
    return (spec.eigenvectors * w[None, :]) @ spec.eigenvectors.T


def exponent_ladder(spec: SpectralData) -> ExponentLadder:
    """The three admissible axial exponents and the ground eigenvalue."""
    return ExponentLadder(
        alpha_min=spec.alpha_min,
        alpha_zero=spec.alpha_zero,
        alpha_max=spec.alpha_max,
        lambda1=spec.lambda1,
    )
