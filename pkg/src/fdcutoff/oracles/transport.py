"""Optimal transport oracles.

* In 1-D the monotone (quantile) coupling is optimal, so
  ``W_2^2 = int_0^1 (F^{-1}(q) - G^{-1}(q))^2 dq``. Quantiles of Barenblatt
  laws come from bisection on their closed-form radial tail, which is a
  regularized incomplete Beta function.
* Between two equal-size point clouds the exact empirical ``W_2^2`` is a
  linear assignment problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from scipy.special import betainc, ndtri

from ..barenblatt import ModelParams, Regime
from ..dynamics import flow_state
from ..errors import DomainError, UnsupportedSize
from .sampling import SampleCloud

__all__ = [
    "Law1D",
    "barenblatt_law_1d",
    "flow_law_1d",
    "law_from_cdf",
    "quantile_grid",
    "ot_1d_quantile",
    "ot_assignment",
    "DebiasedEstimate",
    "debiased_assignment_w2",
    "MAX_ASSIGNMENT_SIZE",
]

MAX_ASSIGNMENT_SIZE = 2048
_BISECT_ITERS = 80


@dataclass(frozen=True)
class Law1D:
    """A probability law on the line, given by its quantile function."""

    quantile: Callable[[np.ndarray], np.ndarray]
    label: str = ""


def _bisect_increasing(fun, target, lo, hi, iters: int = _BISECT_ITERS):
    """Vectorized bisection for ``fun(x) = target`` with ``fun`` increasing."""
    lo = np.broadcast_to(np.asarray(lo, dtype=float), np.shape(target)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), np.shape(target)).copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        done = (mid <= lo) | (mid >= hi)
        if np.all(done):
            break
        below = fun(mid) < target
        lo = np.where(below & ~done, mid, lo)
        hi = np.where(~below & ~done, mid, hi)
    return 0.5 * (lo + hi)


def _symmetric_radial_quantile(tail: Callable, log_lo: float, log_hi: float, radius_of: Callable):
    """Quantile of a law symmetric about 0 with ``P(S > s) = tail(s)``.

    ``S`` is a monotone function of ``|X|`` and ``radius_of`` maps ``s`` to
    ``|x|``. Bisection runs on ``log s`` in ``[log_lo, log_hi]``.
    """

    def q(u):
        u = np.asarray(u, dtype=float)
        if np.any((u <= 0.0) | (u >= 1.0)):
            raise DomainError("quantile levels must lie in (0, 1)")
        upper_half = u > 0.5
        target = np.where(upper_half, 2.0 * (1.0 - u), 2.0 * u)  # P(S > s)
        # P(S > exp(y)) decreases in y; bisect on -tail
        y = _bisect_increasing(lambda y: -tail(np.exp(y)), -target, log_lo, log_hi)
        r = radius_of(np.exp(y))
        r = np.where(target >= 1.0, 0.0, r)
        return np.where(upper_half, r, -r)

    return q


def barenblatt_law_1d(
    params: ModelParams, center: float = 0.0, which: str = "stationary"
) -> Law1D:
    """The 1-D law ``v_inf`` (or ``B``) shifted to ``center``."""
    if params.d != 1:
        raise DomainError("1-D quantiles need d = 1")
    stationary = which in ("stationary", "v_inf")
    if params.regime is Regime.GAUSSIAN:
        sigma = 1.0 if stationary else math.sqrt(2.0)
        return Law1D(lambda u: center + sigma * ndtri(np.asarray(u, dtype=float)), "gaussian")
    scale = params.b if stationary else params.alpha * params.b
    log_c = params.log_c_stat if stationary else params.log_c
    return _profile_law(params, center, log_c, scale, 1.0)


def _profile_law(params: ModelParams, center: float, log_c: float, scale: float, dilation: float) -> Law1D:
    # law of center + dilation * Y with Y having density prop. to the profile (c, scale)
    p = params.p
    ratio = math.exp(log_c - math.log(scale))

    def radius_of(s):
        return dilation * np.sqrt(ratio * s)

    if params.regime is Regime.FAST_DIFFUSION:
        # S = b y^2 / c ~ BetaPrime(1/2, p - 1/2); 1/(1+S) ~ Beta(p - 1/2, 1/2)
        def tail(s):
            return betainc(p - 0.5, 0.5, 1.0 / (1.0 + s))

        q = _symmetric_radial_quantile(tail, -750.0, 750.0, radius_of)
    else:
        # S ~ Beta(1/2, p + 1); P(S > s) = I_{1-s}(p + 1, 1/2)
        def tail(s):
            return betainc(p + 1.0, 0.5, -np.expm1(np.log(s)))

        q = _symmetric_radial_quantile(tail, -750.0, 0.0, radius_of)
    return Law1D(lambda u: center + q(u), params.regime.value)


def flow_law_1d(params: ModelParams, t: float, x0: float) -> Law1D:
    """The 1-D law of ``v(t, .)`` built from the unit profile ``B``.

    ``v(t, x) = s^(-alpha) B((x - h) / s^alpha)`` with
    ``s = alpha (1 - exp(-t/alpha))`` and ``h = exp(-t) x0``; the quantiles
    do not go through ``a(t)`` or ``v_inf``.
    """
    if params.d != 1:
        raise DomainError("1-D quantiles need d = 1")
    h = math.exp(-t) * x0
    if params.regime is Regime.GAUSSIAN:
        sigma = math.sqrt(-math.expm1(-2.0 * t))
        return Law1D(lambda u: h + sigma * ndtri(np.asarray(u, dtype=float)), "gaussian_flow")
    flow_state(params, t, abs(x0))
    s = params.alpha * -math.expm1(-t / params.alpha)
    return _profile_law(params, h, params.log_c, params.alpha * params.b, s ** params.alpha)


def law_from_cdf(cdf: Callable[[np.ndarray], np.ndarray], lo: float = -1e6, hi: float = 1e6) -> Law1D:
    """Law given by a CDF; quantiles by bisection on ``[lo, hi]``.

    Raises
    ------
    DomainError
        If the CDF is not nondecreasing on a probe grid.
    """
    probe = np.linspace(lo, hi, 10_001)
    vals = np.asarray(cdf(probe), dtype=float)
    if np.any(np.diff(vals) < 0.0):
        raise DomainError("CDF is not monotone")

    def q(u):
        u = np.asarray(u, dtype=float)
        return _bisect_increasing(cdf, u, lo, hi)

    return Law1D(q, "cdf")


def quantile_grid(n: int, graded: bool = True):
    """Quantile levels and weights for the midpoint rule on ``(0, 1)``.

    With ``graded=True`` the midpoints ``u_j = (j + 1/2)/n`` are mapped by
    ``q = u^3 (10 - 15u + 6u^2)``, which clusters levels near 0 and 1 where
    heavy-tailed quantiles blow up; weights are ``q'(u_j)/n`` renormalized to
    sum to 1. ``graded=False`` gives the plain midpoint rule.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    u = (np.arange(n) + 0.5) / n
    if not graded:
        return u, np.full(n, 1.0 / n)
    q = u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)
    w = 30.0 * u * u * (1.0 - u) ** 2 / n
    return q, w / w.sum()


def ot_1d_quantile(mu, nu, n_quantiles: int = 100_000, graded: bool = True) -> float:
    """``W_2^2`` between two 1-D laws via the monotone coupling.

    ``mu`` and ``nu`` are :class:`Law1D` objects or CDF callables.
    """
    if n_quantiles < 1000:
        raise DomainError("n_quantiles must be >= 1000")
    mu = mu if isinstance(mu, Law1D) else law_from_cdf(mu)
    nu = nu if isinstance(nu, Law1D) else law_from_cdf(nu)
    q, w = quantile_grid(n_quantiles, graded)
    x = np.asarray(mu.quantile(q), dtype=float)
    y = np.asarray(nu.quantile(q), dtype=float)
    if np.any(np.diff(x) < 0.0) or np.any(np.diff(y) < 0.0):
        raise DomainError("quantile function is not monotone")
    diff = x - y
    return float(math.fsum(w * diff * diff))


def ot_assignment(cloud_a, cloud_b) -> float:
    """Exact empirical ``W_2^2`` between two equal-size clouds.

    Solves the linear assignment problem on squared Euclidean costs and
    returns the mean matched cost.
    """
    a = cloud_a.points if isinstance(cloud_a, SampleCloud) else np.atleast_2d(np.asarray(cloud_a, float))
    b = cloud_b.points if isinstance(cloud_b, SampleCloud) else np.atleast_2d(np.asarray(cloud_b, float))
    if a.shape != b.shape:
        raise DomainError(f"cloud shapes differ: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if n > MAX_ASSIGNMENT_SIZE:
        raise UnsupportedSize(f"assignment size {n} exceeds {MAX_ASSIGNMENT_SIZE}")
    cost = cdist(a, b, "sqeuclidean")
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / n)


@dataclass(frozen=True)
class DebiasedEstimate:
    mean: float
    std_error: float
    values: tuple


def debiased_assignment_w2(
    sample_mu: Callable[[int, int], SampleCloud],
    sample_nu: Callable[[int, int], SampleCloud],
    n: int,
    seeds: Sequence[int],
) -> DebiasedEstimate:
    """Debiased assignment estimate of ``W_2^2(mu, nu)`` over independent seeds.

    Per seed: ``W(mu_n, nu_n) - (W(mu_n, mu'_n) + W(nu_n, nu'_n)) / 2`` with
    four independent clouds. The self terms cancel the leading
    ``n^(-2/d)`` sampling bias of the plain empirical estimate.
    ``sample_x(seed, stream)`` must return a cloud of size ``n``.
    """
    vals = []
    for s in seeds:
        a1, a2 = sample_mu(s, 0), sample_mu(s, 1)
        b1, b2 = sample_nu(s, 2), sample_nu(s, 3)
        for c in (a1, a2, b1, b2):
            if c.n != n:
                raise DomainError("sampler returned the wrong size")
        vals.append(ot_assignment(a1, b1) - 0.5 * (ot_assignment(a1, a2) + ot_assignment(b1, b2)))
    arr = np.asarray(vals)
    se = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else math.inf
    return DebiasedEstimate(float(arr.mean()), se, tuple(vals))
