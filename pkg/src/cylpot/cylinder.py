"""Green's function and Martin kernels on the cylinder R x base.

With mu_k = lam_k + b**2/4 the cylinder Green's function of the operator
d^2/du^2 + b d/du + (base generator) has the exact eigenmode form

    G(u, i; v, j) = exp(-b(u-v)/2) * sum_k phi_k(i) phi_k(j)
                    * exp(-|u-v| sqrt(mu_k)) / (2 sqrt(mu_k)),

obtained by integrating the drifted axial Gaussian density against the base
heat kernel over all times.  The axial coordinate stays a real number; only
the base is discrete.  Everything here evaluates in log space where needed,
so poles can sit tens of units away without overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.linalg

from .base import BaseOperator
from .spectral import SpectralData

__all__ = [
    "CylinderPoint",
    "NumericalLossError",
    "QuadratureToleranceError",
    "gaussian_density",
    "GreenEvaluator",
    "StableAxialEvaluator",
    "SeparatedSolution",
    "MartinKernel",
    "ModeSolution",
    "truncated_dirichlet_solve",
    "positivity_scan",
    "ExponentFit",
    "fit_exponent",
]

# Witness threshold of the positivity scanner, relative to the local
# sum-of-magnitudes scale of the evaluated combination.
_NEGATIVITY_TOL = 1e-12

# Below this signed-sum/magnitude-sum ratio the eigenmode route has lost too
# many digits to cancellation and evaluation switches to resolvent
# quadrature (tridiagonal bases only).
_HEALTH_SWITCH = 1e-8


class CylinderPoint(NamedTuple):
    """A point (u, x) of the cylinder: real axial coordinate, base node index."""

    u: float
    node: int


class NumericalLossError(ArithmeticError):
    """A mode sum lost all significant digits to cancellation."""


class QuadratureToleranceError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, estimate: float, abserr: float):
        super().__init__(message)
        self.estimate = estimate
        self.abserr = abserr


def gaussian_density(t: float, w: float, b: float) -> float:
    """Axial transition density (4 pi t)^(-1/2) exp(-(w + b t)^2 / (4 t)).

    This is the time-t kernel of d^2/du^2 + b d/du evaluated at displacement
    w; it integrates to 1 over w for every t and b.  Underflow to 0 is fine.
    """
    if t <= 0.0:
        raise ValueError("gaussian_density requires t > 0")
    z = w + b * t
    return math.exp(-z * z / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)


def _gauss_panel_rule(edges: Sequence[float], order: int = 12):
    """Composite Gauss-Legendre nodes/weights over the given panel edges."""
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


class StableAxialEvaluator:
    """Deep-separation axial kernel values through resolvent quadrature.

    Evaluates V(s; x, y) = sum_k phi_k(x) phi_k(y) exp(-s sqrt(mu_k)) /
    (2 sqrt(mu_k)) without touching the eigendata, via

        V(s) = (1/pi) * int_0^inf cos(s w) [(A + b^2/4 + w^2)^{-1}]_{xy} dw

    in the mass-symmetrized frame.  Each resolvent is a Cholesky solve of a
    positive-definite tridiagonal matrix with non-positive off-diagonals, so
    its columns decay multiplicatively through the base without
    cancellation; the only cancellation left is the mild cosine damping.
    Meaningful exactly in the deep regime (resolvent columns concentrated at
    small w), which is when the eigenmode route degrades.
    """

    # Panels follow the resolvent's w-decay: fine where transit-suppressed
    # columns still move, coarse in the dead tail.
    _EDGES = (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0,
              4.0, 5.0, 6.0, 8.0, 10.0, 14.0, 20.0, 28.0, 40.0)

    def __init__(self, base: BaseOperator, b: float):
        if not base.is_tridiagonal or base.n < 2:
            raise ValueError("stable axial evaluation needs a tridiagonal base")
        self._scale = 1.0 / np.sqrt(base.mass)
        K = base.stiffness
        self._diag = np.diag(K) * self._scale * self._scale
        self._off = np.diag(K, 1) * self._scale[:-1] * self._scale[1:]
        self._shift = 0.25 * b * b
        self._w, self._qw = _gauss_panel_rule(self._EDGES)
        self._columns = {}

    def _column(self, node: int) -> np.ndarray:
        cols = self._columns.get(node)
        if cols is None:
            n = self._diag.shape[0]
            ab = np.zeros((2, n))
            ab[0, 1:] = self._off
            rhs = np.zeros(n)
            rhs[node] = 1.0
            cols = np.empty((n, self._w.size))
            for idx, w in enumerate(self._w):
                ab[1, :] = self._diag + self._shift + w * w
                cols[:, idx] = scipy.linalg.solveh_banded(ab, rhs)
            self._columns[node] = cols
        return cols

    def values(self, s: float, root: int, nodes) -> np.ndarray:
        """V(s; root, nodes) for axial separation s >= 0."""
        cols = self._column(root)
        nodes = np.atleast_1d(np.asarray(nodes, dtype=int))
        integrand = cols[nodes, :] * np.cos(s * self._w)[None, :]
        vals = integrand @ self._qw / math.pi
        return vals * self._scale[nodes] * self._scale[root]


@dataclass(frozen=True)
class SeparatedSolution:
    """Separated solution exp(alpha*u) * profile(x), normalized at a point."""

    alpha: float
    profile: np.ndarray

    def __call__(self, p: CylinderPoint) -> float:
        return math.exp(self.alpha * p.u) * self.profile[p.node]

    def log_value(self, p: CylinderPoint) -> float:
        return self.alpha * p.u + math.log(self.profile[p.node])


@dataclass(frozen=True)
class GreenEvaluator:
    """Immutable evaluator of G, Martin kernels and the canonical solutions.

    The reference point (0, reference node of the base) normalizes every
    Martin kernel.  Safe for unlimited concurrent evaluation.
    """

    spec: SpectralData
    base: BaseOperator
    reference: CylinderPoint = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.reference is None:
            object.__setattr__(
                self, "reference", CylinderPoint(0.0, self.base.reference_node)
            )
        ref = CylinderPoint(float(self.reference[0]), int(self.reference[1]))
        object.__setattr__(self, "reference", ref)
        if not 0 <= ref.node < self.spec.n:
            raise ValueError("reference node out of range")
        if np.any(self.spec.mu <= 0.0):
            raise ValueError("all shifted rates mu_k must be positive")
        object.__setattr__(self, "_sqrt_mu", np.sqrt(self.spec.mu))
        stable = None
        if self.base.is_tridiagonal and self.base.n >= 2:
            stable = StableAxialEvaluator(self.base, self.spec.b)
        object.__setattr__(self, "_stable", stable)

    @property
    def sqrt_mu(self) -> np.ndarray:
        return self._sqrt_mu

    def _pair_weights(self, i: int, j: int) -> np.ndarray:
        """Mode weights phi_k(i) phi_k(j) / (2 sqrt(mu_k))."""
        n = self.spec.n
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"node index out of range: ({i}, {j}) with n={n}")
        phi = self.spec.eigenvectors
        return phi[i] * phi[j] / (2.0 * self._sqrt_mu)

    def log_green(
        self,
        p: CylinderPoint,
        q: CylinderPoint,
        extended: bool = False,
        allow_stable: bool = True,
    ) -> float:
        """log G(p; q), computed against the factored mode-1 decay.

        With ``extended=True`` the mode sum accumulates in 80-bit floats,
        which buys the exactness suites two extra digits of headroom against
        cancellation; the eigendata itself stays double precision.  When the
        signed sum has lost its digits and ``allow_stable`` is set, the value
        is recomputed by resolvent quadrature (tridiagonal bases); with
        ``allow_stable=False`` such evaluations raise NumericalLossError
        instead, which the 1e-12 exactness sweeps use to skip pairs they
        cannot measure at that precision.
        """
        w = p.u - q.u
        s = abs(w)
        delta = self._sqrt_mu - self._sqrt_mu[0]
        weights = self._pair_weights(p.node, q.node)
        if extended:
            decay = np.exp(np.longdouble(-s) * delta.astype(np.longdouble))
            tail = float(np.dot(weights.astype(np.longdouble), decay))
        else:
            decay = np.exp(-s * delta)
            tail = float(np.dot(weights, decay))
        magnitude = float(np.dot(np.abs(weights), decay))
        if tail <= _HEALTH_SWITCH * magnitude:
            # Cancellation ate the eigenmode sum; go through the resolvent.
            if self._stable is None or not allow_stable:
                raise NumericalLossError(
                    f"mode sum for G({p}; {q}) is {tail:.3e} against magnitude "
                    f"{magnitude:.3e}"
                    + ("; no stable route for this base" if self._stable is None else "")
                )
            val = float(self._stable.values(s, p.node, [q.node])[0])
            if not val > 0.0:
                raise NumericalLossError(
                    f"resolvent value for G({p}; {q}) is {val:.3e}"
                )
            return -0.5 * self.spec.b * w + math.log(val)
        return -0.5 * self.spec.b * w - s * self._sqrt_mu[0] + math.log(tail)

    def green(self, p: CylinderPoint, q: CylinderPoint) -> float:
        """G(p; q) in closed eigenmode form (finite on the diagonal too)."""
        return math.exp(self.log_green(p, q))

    def log_green_profile(self, u: float, pole: CylinderPoint) -> np.ndarray:
        """log G(u, x; pole) for every base node x at once.

        Intended for healthy (non-cancelling) separations; entries whose
        mode sum came out non-positive are -inf.
        """
        w = u - pole.u
        s = abs(w)
        delta = self._sqrt_mu - self._sqrt_mu[0]
        phi = self.spec.eigenvectors
        weights = (phi[pole.node] / (2.0 * self._sqrt_mu)) * np.exp(-s * delta)
        tails = phi @ weights
        out = np.full(self.spec.n, -np.inf)
        ok = tails > 0.0
        out[ok] = (
            -0.5 * self.spec.b * w
            - s * self._sqrt_mu[0]
            + np.log(tails[ok].astype(float))
        )
        return out

    def green_by_quadrature(
        self, p: CylinderPoint, q: CylinderPoint, rel_tol: float = 1e-9
    ) -> float:
        """Independent evaluation of G by adaptive time quadrature.

        Integrates gaussian_density(t, u-v, b) * pi_t(i, j) over t in
        (0, inf), split at the saddle time |u - v| / (2 sqrt(mu_1)).
        """
        w = p.u - q.u
        if w == 0.0 and p.node == q.node:
            raise ValueError("quadrature route requires p != q")
        i, j = p.node, q.node
        lam = self.spec.eigenvalues
        phi = self.spec.eigenvectors
        c = phi[i] * phi[j]
        b = self.spec.b

        def integrand(t: float) -> float:
            return gaussian_density(t, w, b) * float(np.dot(c, np.exp(-lam * t)))

        t_split = max(abs(w) / (2.0 * self._sqrt_mu[0]), 1e-2)
        # quad cannot be asked for less than ~50 eps; the requested rel_tol
        # is still enforced on the achieved error estimate below.
        quad_eps = max(rel_tol / 4.0, 1e-13)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
            tail, tail_err = scipy.integrate.quad(
                integrand, t_split, np.inf, epsabs=0.0, epsrel=quad_eps, limit=400
            )
            # Substitution t = tau^2 removes the 1/sqrt(t) factor at 0.
            head, head_err = scipy.integrate.quad(
                lambda tau: 2.0 * tau * integrand(tau * tau),
                0.0,
                math.sqrt(t_split),
                epsabs=max(abs(tail) * quad_eps, 1e-300),
                epsrel=quad_eps,
                limit=400,
            )
        total = head + tail
        abserr = head_err + tail_err
        if abserr > rel_tol * abs(total):
            raise QuadratureToleranceError(
                f"requested relative tolerance {rel_tol:.1e} not met: "
                f"estimate {total:.12e} with absolute error {abserr:.3e}",
                estimate=total,
                abserr=abserr,
            )
        return total

    def martin_kernel(self, pole: CylinderPoint) -> "MartinKernel":
        """Martin kernel K_pole = G(., .; pole) / G(reference; pole)."""
        pole = CylinderPoint(float(pole[0]), int(pole[1]))
        if pole == self.reference:
            raise ValueError("Martin kernel is undefined at its own normalization point")
        log_ref = self.log_green(self.reference, pole)
        return MartinKernel(evaluator=self, pole=pole, log_reference=log_ref)

    def f_plus(self) -> SeparatedSolution:
        """The canonical positive solution exp(alpha_max u) phi_0(x)/phi_0(x0)."""
        phi0 = self.spec.ground_state
        return SeparatedSolution(
            alpha=self.spec.alpha_max, profile=phi0 / phi0[self.reference.node]
        )

    def f_minus(self) -> SeparatedSolution:
        """The mirror solution exp(alpha_min u) phi_0(x)/phi_0(x0)."""
        phi0 = self.spec.ground_state
        return SeparatedSolution(
            alpha=self.spec.alpha_min, profile=phi0 / phi0[self.reference.node]
        )

    def martin_deviation_from_f_plus(
        self, pole: CylinderPoint, u_grid: np.ndarray, nodes: np.ndarray
    ) -> np.ndarray:
        """K_pole - F_plus on a probe grid, with the shared mode-1 part
        cancelled algebraically so the difference keeps full relative
        precision however deep the pole sits.

        Requires pole.u >= max(u_grid).  Returns an array of shape
        (len(nodes), len(u_grid)).
        """
        u_grid = np.asarray(u_grid, dtype=float)
        nodes = np.asarray(nodes, dtype=int)
        v, jp = float(pole[0]), int(pole[1])
        if np.any(u_grid > v):
            raise ValueError("probe grid must stay on the near side of the pole")
        i0 = self.reference.node
        sm = self._sqrt_mu
        delta = sm - sm[0]
        phi = self.spec.eigenvectors
        c_pole = phi[jp] / (2.0 * sm)            # (n_modes,)
        C = phi[nodes] * c_pole[None, :]          # (n_nodes, n_modes)
        C0 = phi[i0] * c_pole                     # (n_modes,)
        m1 = C[:, 0]
        m1_ref = C0[0]
        decay_ref = np.exp(-v * delta)            # (n_modes,)
        D0 = float(np.dot(C0, decay_ref))
        # Decay factors exp(-(v - u) delta_k); the mode-1 row is all ones and
        # cancels out of N below, which is the whole point of this routine.
        E = np.exp(-delta[:, None] * (v - u_grid)[None, :])
        const = float(np.dot(C0[1:], decay_ref[1:]))
        N = (C[:, 1:] * m1_ref) @ E[1:, :] - np.outer(m1 * const, np.ones_like(u_grid))
        alpha = self.spec.alpha_max
        return np.exp(alpha * u_grid)[None, :] * N / (D0 * m1_ref)


@dataclass(frozen=True)
class MartinKernel:
    """Green's function with a fixed pole, normalized at the reference point."""

    evaluator: GreenEvaluator
    pole: CylinderPoint
    log_reference: float

    def __call__(self, p: CylinderPoint) -> float:
        return math.exp(self.log_value(p))

    def log_value(self, p: CylinderPoint) -> float:
        return self.evaluator.log_green(p, self.pole) - self.log_reference


@dataclass(frozen=True)
class ModeSolution:
    """Axially separated solution sum_k (A_k e^{a_k^+ u} + B_k e^{a_k^- u}) phi_k.

    Coefficients are stored against the cap-anchored scaled basis
    {exp(a_k^+ (u - T)), exp(a_k^- (u + T))} so that construction and
    evaluation never overflow; the unscaled A_k, B_k are derived views (they
    may underflow to 0 for very stiff modes, which is harmless for display).
    """

    spec: SpectralData
    a_scaled: np.ndarray
    b_scaled: np.ndarray
    anchor: float

    @property
    def coeff_plus(self) -> np.ndarray:
        """Unscaled coefficients A_k of exp(alpha_k^+ u)."""
        with np.errstate(under="ignore"):
            return self.a_scaled * np.exp(-self.spec.alpha_plus() * self.anchor)

    @property
    def coeff_minus(self) -> np.ndarray:
        """Unscaled coefficients B_k of exp(alpha_k^- u)."""
        with np.errstate(under="ignore"):
            return self.b_scaled * np.exp(self.spec.alpha_minus() * self.anchor)

    @classmethod
    def from_coefficients(
        cls, spec: SpectralData, coeff_plus: Sequence[float], coeff_minus: Sequence[float]
    ) -> "ModeSolution":
        """Build from unscaled coefficients (anchor T = 0)."""
        a = np.zeros(spec.n)
        b = np.zeros(spec.n)
        a[: len(coeff_plus)] = coeff_plus
        b[: len(coeff_minus)] = coeff_minus
        return cls(spec=spec, a_scaled=a, b_scaled=b, anchor=0.0)

    def _scaled_parts(self, u: np.ndarray):
        """Common log factor M(u) plus O(1) mode coefficients at each u."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        ap = self.spec.alpha_plus()
        am = self.spec.alpha_minus()
        with np.errstate(divide="ignore"):
            log_a = np.log(np.abs(self.a_scaled))
            log_b = np.log(np.abs(self.b_scaled))
        ga = log_a[:, None] + np.outer(ap, u - self.anchor)
        gb = log_b[:, None] + np.outer(am, u + self.anchor)
        M = np.maximum(ga.max(axis=0), gb.max(axis=0))
        M = np.where(np.isfinite(M), M, 0.0)
        with np.errstate(under="ignore"):
            ca = np.sign(self.a_scaled)[:, None] * np.exp(ga - M[None, :])
            cb = np.sign(self.b_scaled)[:, None] * np.exp(gb - M[None, :])
        return M, ca + cb, np.abs(ca) + np.abs(cb)

    def evaluate(self, u) -> np.ndarray:
        """Values on all base nodes; shape (n_nodes,) or (n_nodes, len(u))."""
        scalar = np.isscalar(u)
        M, coef, _ = self._scaled_parts(u)
        with np.errstate(over="ignore", under="ignore"):
            vals = (self.spec.eigenvectors @ coef) * np.exp(M)[None, :]
        return vals[:, 0] if scalar else vals

    def evaluate_scaled(self, u):
        """(log factor, values/scale factor, local magnitude scale) per u."""
        M, coef, mag = self._scaled_parts(u)
        phi = self.spec.eigenvectors
        return M, phi @ coef, np.abs(phi) @ mag


def truncated_dirichlet_solve(
    ev: GreenEvaluator, T: float, g_minus: np.ndarray, g_plus: np.ndarray
) -> ModeSolution:
    """Solve the cylinder Dirichlet problem on [-T, T] with cap data g_-, g_+.

    Each mode's 2x2 system matches the mass projections of the cap data in
    the scaled basis; the determinant 1 - exp(-4 T sqrt(mu_k)) is positive
    whenever lam_k > -b**2/4, which lam_k > 0 guarantees.
    """
    if T <= 0.0:
        raise ValueError("half-length T must be positive")
    spec = ev.spec
    g_minus = np.asarray(g_minus, dtype=float)
    g_plus = np.asarray(g_plus, dtype=float)
    if g_minus.shape != (spec.n,) or g_plus.shape != (spec.n,):
        raise ValueError("cap data must be node vectors")
    c_minus = spec.eigenvectors.T @ (spec.mass * g_minus)
    c_plus = spec.eigenvectors.T @ (spec.mass * g_plus)
    with np.errstate(under="ignore"):
        q_plus = np.exp(-2.0 * T * spec.alpha_plus())
        q_minus = np.exp(2.0 * T * spec.alpha_minus())
    det = 1.0 - q_plus * q_minus
    if np.any(det <= 0.0):
        raise ArithmeticError("degenerate mode system: coincident axial rates")
    a_scaled = (c_plus - q_minus * c_minus) / det
    b_scaled = (c_minus - q_plus * c_plus) / det
    return ModeSolution(spec=spec, a_scaled=a_scaled, b_scaled=b_scaled, anchor=T)


def positivity_scan(
    sol: ModeSolution,
    u_range: Tuple[float, float],
    u_step: float = 0.05,
) -> Optional[CylinderPoint]:
    """Scan for a point where the solution dips below -1e-12 * local scale.

    Returns the first witness in increasing-u order, or None.  A None result
    falsifies nothing; the scanner is a falsifier, not a decision procedure.
    """
    lo, hi = u_range
    if not (hi >= lo and u_step > 0.0):
        raise ValueError("invalid scan range")
    count = int(math.floor((hi - lo) / u_step + 1e-9)) + 1
    grid = lo + u_step * np.arange(count)
    for start in range(0, count, 256):
        chunk = grid[start : start + 256]
        _, vals, scale = sol.evaluate_scaled(chunk)
        bad = vals < -_NEGATIVITY_TOL * scale
        if np.any(bad):
            nodes, cols = np.nonzero(bad)
            order = np.lexsort((nodes, cols))
            node, col = nodes[order[0]], cols[order[0]]
            return CylinderPoint(float(chunk[col]), int(node))
    return None


class ExponentFit(NamedTuple):
    alpha_hat: float
    max_residual: float


def fit_exponent(values: Sequence[Tuple[float, float]]) -> ExponentFit:
    """Least-squares axial growth rate of log K(u) along increasing u."""
    vals = np.asarray(values, dtype=float)
    if vals.ndim != 2 or vals.shape[1] != 2 or vals.shape[0] < 3:
        raise ValueError("need at least 3 (u, value) samples")
    u = vals[:, 0]
    y = vals[:, 1]
    if np.any(np.diff(u) <= 0.0):
        raise ValueError("u samples must be strictly increasing")
    if np.any(y <= 0.0):
        raise ValueError("exponent fit requires positive values")
    logy = np.log(y)
    design = np.column_stack([u, np.ones_like(u)])
    coef, *_ = np.linalg.lstsq(design, logy, rcond=None)
    resid = logy - design @ coef
    return ExponentFit(alpha_hat=float(coef[0]), max_residual=float(np.max(np.abs(resid))))
