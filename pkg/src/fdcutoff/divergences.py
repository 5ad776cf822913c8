"""Wasserstein, relative entropy and Fisher information along the flow.

Three layers:

* transport formulas for position-scale and elliptic families
  (``w2_sq_position_scale``, ``w2_sq_elliptic``), with a small self-contained
  symmetric eigensolver for the matrix square roots;
* closed forms of ``W_2^2``, ``H_m`` and ``I_m`` between ``v(t, .)`` and
  ``v_inf`` in terms of ``a(t)``, ``|h(t)|``, ``M_2`` and ``N_m``;
* a report record bundling the three with their provenance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .barenblatt import (
    ModelParams,
    Regime,
    log_density_at,
    moment,
    moment_gap,
    support_radius,
)
from .dynamics import flow_state
from .errors import (
    DomainError,
    InfiniteMoment,
    PreconditionError,
    UnsupportedSize,
)

__all__ = [
    "EllipticMoments",
    "Source",
    "DivergenceReport",
    "jacobi_eigh",
    "sqrtm_psd",
    "transport_map_matrix",
    "w2_sq_position_scale",
    "w2_sq_position_scale_cov",
    "w2_sq_elliptic",
    "w2_sq_flow",
    "entropy_flow",
    "fisher_flow",
    "entropy_bregman_form",
    "distance_report",
    "MAX_MATRIX_DIM",
]

MAX_MATRIX_DIM = 64
_SYM_TOL = 1e-12
_PSD_TOL = 1e-10


# ---------------------------------------------------------------------------
# linear algebra


def jacobi_eigh(S, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Iterates until the off-diagonal Frobenius norm is below
    ``tol * ||S||_F``.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    V : ndarray
        Orthonormal eigenvectors as columns.
    """
    A = np.array(S, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("matrix must be square")
    n = A.shape[0]
    if n > MAX_MATRIX_DIM:
        raise UnsupportedSize(f"matrix dimension {n} exceeds {MAX_MATRIX_DIM}")
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        # direct sum: the difference of squared norms cancels to ~sqrt(eps)
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # rotate rows and columns p, q
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    w = np.diag(A).copy()
    order = np.argsort(w)
    return w[order], V[:, order]


def _check_symmetric(S, name: str) -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError(f"{name} must be a square matrix")
    scale = max(1.0, float(np.max(np.abs(S))) if S.size else 1.0)
    if np.max(np.abs(S - S.T), initial=0.0) > _SYM_TOL * scale:
        raise DomainError(f"{name} is not symmetric")
    return 0.5 * (S + S.T)


def _psd_eigh(S, name: str):
    w, V = jacobi_eigh(S)
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size and w[0] < -_PSD_TOL * scale:
        raise DomainError(f"{name} is not positive semidefinite (eigenvalue {w[0]:.3e})")
    return np.maximum(w, 0.0), V


def sqrtm_psd(S) -> np.ndarray:
    """Principal square root of a symmetric PSD matrix."""
    S = _check_symmetric(S, "matrix")
    w, V = _psd_eigh(S, "matrix")
    return (V * np.sqrt(w)) @ V.T


def _inv_sqrtm_pd(S) -> np.ndarray:
    w, V = _psd_eigh(S, "matrix")
    if w.size and w[0] <= 0.0:
        raise DomainError("matrix is singular")
    return (V / np.sqrt(w)) @ V.T


@dataclass(frozen=True)
class EllipticMoments:
    """Mean and covariance of one member of an elliptic family."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = _check_symmetric(self.covariance, "covariance")
        if cov.shape != (mean.size, mean.size):
            raise DomainError("mean and covariance dimensions disagree")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @classmethod
    def isotropic(cls, d: int, mean_norm: float = 0.0, variance: float = 1.0) -> "EllipticMoments":
        mean = np.zeros(d)
        if d:
            mean[0] = mean_norm
        return cls(mean, variance * np.eye(d))

    @property
    def d(self) -> int:
        return self.mean.size

    @property
    def second_moment_matrix(self) -> np.ndarray:
        """``M = Sigma + m m^T``."""
        return self.covariance + np.outer(self.mean, self.mean)


def w2_sq_position_scale(mu: EllipticMoments, A, h) -> float:
    """``W_2^2(mu, T#mu)`` for ``T(x) = A x + h`` with ``A`` symmetric PSD.

    ``Tr((A - I)^2 M) + 2 <(A - I) m, h> + |h|^2`` with ``M = Sigma + m m^T``.
    """
    A = _check_symmetric(A, "A")
    _psd_eigh(A, "A")
    h = np.atleast_1d(np.asarray(h, dtype=float))
    if A.shape != (mu.d, mu.d) or h.shape != (mu.d,):
        raise DomainError("dimension mismatch")
    D = A - np.eye(mu.d)
    val = float(np.trace(D @ D @ mu.second_moment_matrix) + 2.0 * (D @ mu.mean) @ h + h @ h)
    return max(val, 0.0)


def w2_sq_position_scale_cov(mu: EllipticMoments, A, h) -> float:
    """Covariance form ``Tr(S_mu + S_nu - 2 A S_mu) + |m_mu - m_nu|^2`` of the same quantity."""
    A = _check_symmetric(A, "A")
    _psd_eigh(A, "A")
    h = np.atleast_1d(np.asarray(h, dtype=float))
    S_mu = mu.covariance
    S_nu = A @ S_mu @ A
    m_nu = A @ mu.mean + h
    dm = mu.mean - m_nu
    return max(float(np.trace(S_mu + S_nu - 2.0 * A @ S_mu) + dm @ dm), 0.0)


def transport_map_matrix(cov_mu, cov_nu) -> np.ndarray:
    """``A = S_mu^(-1/2) (S_mu^(1/2) S_nu S_mu^(1/2))^(1/2) S_mu^(-1/2)``."""
    cov_mu = _check_symmetric(cov_mu, "cov_mu")
    cov_nu = _check_symmetric(cov_nu, "cov_nu")
    r = sqrtm_psd(cov_mu)
    r_inv = _inv_sqrtm_pd(cov_mu)
    mid = sqrtm_psd(0.5 * ((r @ cov_nu @ r) + (r @ cov_nu @ r).T))
    A = r_inv @ mid @ r_inv
    return 0.5 * (A + A.T)


def w2_sq_elliptic(mu: EllipticMoments, nu: EllipticMoments) -> float:
    """Bures-type ``W_2^2`` between two members of one elliptic family.

    Commuting covariances use ``Tr((sqrt S_mu - sqrt S_nu)^2)``.
    """
    if mu.d != nu.d:
        raise DomainError("dimension mismatch")
    S1, S2 = mu.covariance, nu.covariance
    dm = mu.mean - nu.mean
    scale = max(1.0, float(np.linalg.norm(S1) * np.linalg.norm(S2)))
    if np.linalg.norm(S1 @ S2 - S2 @ S1) <= 1e-12 * scale:
        if _is_diagonal(S1) and _is_diagonal(S2):
            d1, d2 = np.diag(S1), np.diag(S2)
            if d1.min(initial=0.0) < -_PSD_TOL or d2.min(initial=0.0) < -_PSD_TOL:
                raise DomainError("covariance is not positive semidefinite")
            diff = np.sqrt(np.maximum(d1, 0.0)) - np.sqrt(np.maximum(d2, 0.0))
            return max(float(diff @ diff + dm @ dm), 0.0)
        if mu.d > MAX_MATRIX_DIM:
            raise UnsupportedSize(f"dimension {mu.d} exceeds {MAX_MATRIX_DIM}")
        D = sqrtm_psd(S1) - sqrtm_psd(S2)
        return max(float(np.sum(D * D) + dm @ dm), 0.0)
    if mu.d > MAX_MATRIX_DIM:
        raise UnsupportedSize(f"dimension {mu.d} exceeds {MAX_MATRIX_DIM}")
    r = sqrtm_psd(S1)
    cross = sqrtm_psd(0.5 * ((r @ S2 @ r) + (r @ S2 @ r).T))
    return max(float(np.trace(S1 + S2 - 2.0 * cross) + dm @ dm), 0.0)


def _is_diagonal(S) -> bool:
    return not np.any(S - np.diag(np.diag(S)))


# ---------------------------------------------------------------------------
# closed forms along the flow


def _second_moment_or_raise(params: ModelParams) -> float:
    if not params.has_second_moment:
        raise InfiniteMoment(
            f"v_inf has no second moment: needs m > d/(d+2), m = {params.m!r}, d = {params.d}"
        )
    return moment(params, 2.0)


def w2_sq_flow(params: ModelParams, t: float, x0_norm: float) -> float:
    """``W_2^2(v(t), v_inf) = (1 - a)^2 M_2 + |h|^2``; ``math.inf`` without a second moment."""
    state = flow_state(params, t, x0_norm)
    if not params.has_second_moment:
        return math.inf
    M2 = _second_moment_or_raise(params)
    one_minus_a = state.one_minus_a
    return one_minus_a * one_minus_a * M2 + state.h_norm * state.h_norm


def _log_a(params: ModelParams, t: float) -> float:
    return params.alpha * math.log1p(-math.exp(-t / params.alpha))


def _combined_entropy_factor(ell: float, kappa: float) -> float:
    """``-expm1(kappa ell)/kappa + expm1(2 ell)/2`` for ``ell = log a <= 0``.

    Equals ``sum_{k>=2} ell^k (2^(k-1) - kappa^(k-1)) / k!``; the series is
    used for small ``|ell|`` where the two terms cancel to first order.
    """
    if abs(ell) < 0.05:
        total = 0.0
        term_pow = ell  # ell^k / k! built incrementally
        two = 1.0
        kap = 1.0
        for k in range(2, 30):
            term_pow *= ell / k
            two *= 2.0
            kap *= kappa
            total += term_pow * (two - kap)
            # bound on the piece, since two - kap may vanish for one k
            if abs(term_pow) * (two + abs(kap)) <= 1e-18 * abs(total):
                break
        return total
    return _f_term(ell, kappa) + 0.5 * math.expm1(2.0 * ell)


def _f_term(ell: float, kappa: float) -> float:
    # -expm1(kappa ell) / kappa, with a three-term series when kappa ~ 0
    x = kappa * ell
    if abs(kappa) < 1e-8:
        return -ell * (1.0 + 0.5 * x + x * x / 6.0)
    return -math.expm1(x) / kappa


def entropy_flow(params: ModelParams, t: float, x0_norm: float) -> float:
    """Relative entropy ``H_m(v(t) | v_inf)``.

    Non-Gaussian regimes evaluate
    ``(alpha d / (2alpha-1)) (1 - a^((2alpha-1)/alpha)) N_m + (a^2-1)/2 M_2 + |h|^2/2``
    rearranged as ``M_2 F(log a) + (d N_m - M_2) f(log a) + |h|^2/2`` so the
    first-order cancellation between the two profile terms is done
    analytically. The Gaussian regime uses the Kullback-Leibler divergence
    between ``N(h, a^2 I)`` and ``N(0, I)``.

    Raises
    ------
    InfiniteMoment
        If ``v_inf`` has no second moment.
    """
    state = flow_state(params, t, x0_norm)
    h2 = state.h_norm * state.h_norm
    if params.regime is Regime.GAUSSIAN:
        return 0.5 * (params.d * _kl_scale_term(t) + h2)
    M2 = _second_moment_or_raise(params)
    ell = _log_a(params, t)
    kappa = (2.0 * params.alpha - 1.0) / params.alpha
    # d N_m - M_2 = -(M_2 - d N_m)
    gap = -moment_gap(params)
    # (alpha d/(2alpha-1)) (1 - a^kappa) N_m = d N_m * f(ell)
    value = M2 * _combined_entropy_factor(ell, kappa) + gap * _f_term(ell, kappa) + 0.5 * h2
    return value


def _kl_scale_term(t: float) -> float:
    # a^2 - 1 - log a^2 with a^2 = 1 - u, u = exp(-2t): -u - log1p(-u)
    u = math.exp(-2.0 * t)
    if u < 1e-3:
        total = 0.0
        uk = u
        for k in range(2, 40):
            uk *= u
            piece = uk / k
            total += piece
            if piece <= 1e-18 * total:
                break
        return total
    return -u - math.log1p(-u)


def fisher_flow(params: ModelParams, t: float, x0_norm: float) -> float:
    """Fisher information ``I_m(v(t) | v_inf) = |h|^2 + a^2 (1 - a^(-1/alpha))^2 M_2``.

    ``(1 - a^(-1/alpha))^2 = 1 / expm1(t/alpha)^2``. Returns ``math.inf``
    when ``v_inf`` has no second moment (same gate as ``W_2``).
    """
    state = flow_state(params, t, x0_norm)
    h2 = state.h_norm * state.h_norm
    if not params.has_second_moment:
        return math.inf
    M2 = params.d if params.regime is Regime.GAUSSIAN else _second_moment_or_raise(params)
    s = t / params.alpha
    if s > 700.0:
        ratio_sq = 0.0 if s > 1400.0 else math.exp(-2.0 * s)
    else:
        ratio_sq = 1.0 / math.expm1(s) ** 2
    return h2 + state.a * state.a * ratio_sq * M2


def entropy_bregman_form(
    params: ModelParams,
    density: Callable[[np.ndarray], np.ndarray],
    center_norm: float = 0.0,
    density_support: float = math.inf,
    tol: float = 1e-10,
) -> float:
    """Bregman form of ``H_m(f | v_inf)`` by off-center quadrature.

    ``(1/(m-1)) int f^m - v^m - m v^(m-1) (f - v)`` with ``v = v_inf``.
    ``f`` is radial about a point at distance ``center_norm`` from the
    origin; ``density(r)`` evaluates it at distance ``r`` from that point and
    ``density_support`` is its support radius.

    Raises
    ------
    PreconditionError
        In the porous regime when ``supp f`` is not inside ``supp v_inf``.
    """
    from .oracles.quadrature import offcenter_quadrature

    m = params.m
    R_inf = support_radius(params)
    if params.regime is Regime.POROUS_MEDIUM:
        if not center_norm + density_support <= R_inf * (1.0 + 1e-12):
            raise PreconditionError(
                "Bregman form needs supp f inside supp v_inf: "
                f"|center| + support = {center_norm + density_support!r} > {R_inf!r}"
            )
    h = float(center_norm)
    log_v = lambda r: log_density_at(params, r)  # noqa: E731

    def g(rho, z):
        z = np.asarray(z, dtype=float)
        r = np.sqrt(np.maximum(rho * rho + h * h - 2.0 * rho * h * z, 0.0))
        f = np.asarray(density(r), dtype=float)
        lv = log_v(np.full_like(z, rho))
        v = np.exp(lv)
        if params.regime is Regime.GAUSSIAN:
            with np.errstate(divide="ignore", invalid="ignore"):
                flf = np.where(f > 0, f * np.log(np.where(f > 0, f, 1.0)), 0.0)
            return flf - f * lv + v - f
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vm1 = np.where(v > 0, np.exp((m - 1.0) * lv), 0.0)
        out = (f ** m - v ** m - m * vm1 * (f - v)) / (m - 1.0)
        return out

    bps = [x for x in (h, R_inf, abs(h - density_support), h + density_support) if math.isfinite(x) and x > 0]
    upper = R_inf if params.regime is Regime.POROUS_MEDIUM else math.inf
    res = offcenter_quadrature(
        g, params.d, upper=upper, radial_breakpoints=bps, tol=tol, scale=max(1.0, h), abs_tol=1e-13
    )
    return res.value


# ---------------------------------------------------------------------------
# report


class Source(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE_ORACLE = "quadrature_oracle"
    DISCRETE_OT = "discrete_ot"


@dataclass(frozen=True)
class DivergenceReport:
    """``(W_2^2, H_m, I_m)`` at one ``(d, m, t, |x0|)``.

    ``w2_sq`` is ``math.inf`` without a second moment, ``None`` when not
    computed. ``entropy`` is ``None`` when it is infinite.
    """

    w2_sq: Optional[float]
    entropy: Optional[float]
    fisher: float
    d: int
    m: float
    t: float
    x0_norm: float
    source: Source = Source.CLOSED_FORM
    alpha: float = field(default=float("nan"))

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "alpha": self.alpha,
            "t": self.t,
            "x0_norm": self.x0_norm,
            "w2_sq": self.w2_sq,
            "entropy": self.entropy,
            "fisher": self.fisher,
            "source": self.source.value,
        }


def distance_report(params: ModelParams, t: float, x0_norm: float) -> DivergenceReport:
    """Closed-form report of all three metrics."""
    try:
        ent: Optional[float] = entropy_flow(params, t, x0_norm)
    except InfiniteMoment:
        ent = None
    return DivergenceReport(
        w2_sq=w2_sq_flow(params, t, x0_norm),
        entropy=ent,
        fisher=fisher_flow(params, t, x0_norm),
        d=params.d,
        m=params.m,
        t=float(t),
        x0_norm=float(x0_norm),
        source=Source.CLOSED_FORM,
        alpha=params.alpha,
    )

