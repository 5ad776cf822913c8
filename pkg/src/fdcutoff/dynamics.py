"""Closed-form solutions of the flow from a Dirac mass.

The Fokker-Planck solution ``v(t, .)`` started at ``x0`` is the image of the
stationary profile ``v_inf`` under ``x -> a(t) x + h(t)`` with

    a(t) = (1 - exp(-t/alpha))^alpha,    h(t) = exp(-t) x0.

The unconfined solution ``u(t, x) = t^(-alpha d) B((x - x0) / t^alpha)`` is
linked to ``v`` by ``u(t, x) = R(t)^(-d) v(tau(t), x / R(t))`` with
``R(t) = (1 + t/alpha)^alpha`` and ``tau = log R``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .barenblatt import ModelParams, log_density_at, support_radius
from .errors import DomainError

__all__ = [
    "FlowState",
    "scale_factor",
    "scale_factor_deficit",
    "log_scale_factor_deficit",
    "flow_state",
    "solution_density",
    "log_solution_density",
    "fokker_planck_density",
    "self_similar_density",
    "radius_R",
    "tau",
    "tau_inverse",
    "change_of_variables_residual",
]


def _check_time(t: float) -> float:
    t = float(t)
    if not t > 0.0 or math.isnan(t):
        raise DomainError(f"time must be > 0, got {t!r}")
    return t


def scale_factor(t: float, alpha: float) -> float:
    """``a(t) = (1 - exp(-t/alpha))^alpha`` via ``exp(alpha log1p(-exp(-t/alpha)))``.

    >>> scale_factor(math.log(2.0), 1.0)
    0.5
    """
    t = _check_time(t)
    return math.exp(alpha * math.log1p(-math.exp(-t / alpha)))


def scale_factor_deficit(t: float, alpha: float) -> float:
    """``1 - a(t)`` without cancellation."""
    t = _check_time(t)
    return -math.expm1(alpha * math.log1p(-math.exp(-t / alpha)))


def log_scale_factor_deficit(t: float, alpha: float) -> float:
    """``log(1 - a(t))``, finite even when ``exp(-t/alpha)`` underflows.

    Uses ``1 - a = alpha u g(u)`` with ``u = exp(-t/alpha)`` and
    ``g(u) = 1 + O(u)``.
    """
    t = _check_time(t)
    s = t / alpha
    if s > 600.0:
        return math.log(alpha) - s
    u = math.exp(-s)
    g = -math.expm1(alpha * math.log1p(-u)) / (alpha * u)
    return math.log(alpha) - s + math.log(g)


@dataclass(frozen=True)
class FlowState:
    """Closed-form solution at time ``t``, reduced to ``(a, |h|)``."""

    params: ModelParams
    t: float
    x0_norm: float
    a: float
    h_norm: float

    @property
    def one_minus_a(self) -> float:
        return scale_factor_deficit(self.t, self.params.alpha)

    def support_radius(self) -> float:
        """Support radius around ``h``; ``inf`` unless compact."""
        return self.a * support_radius(self.params)


def flow_state(params: ModelParams, t: float, x0_norm: float) -> FlowState:
    """Populate :class:`FlowState` at time ``t`` from a Dirac at distance ``x0_norm``."""
    t = _check_time(t)
    x0_norm = float(x0_norm)
    if x0_norm < 0.0 or not math.isfinite(x0_norm):
        raise DomainError(f"x0_norm must be finite and >= 0, got {x0_norm!r}")
    return FlowState(
        params=params,
        t=t,
        x0_norm=x0_norm,
        a=scale_factor(t, params.alpha),
        h_norm=math.exp(-t) * x0_norm,
    )


def log_solution_density(state: FlowState, radius_from_center):
    """``log v(t, x)`` for ``|x - h(t)| = radius_from_center``."""
    r = np.asarray(radius_from_center, dtype=float)
    out = -state.params.d * math.log(state.a) + log_density_at(state.params, r / state.a)
    return out if np.ndim(out) else float(out)


def solution_density(state: FlowState, radius_from_center):
    """``v(t, x) = a^(-d) v_inf((x - h)/a)`` at ``|x - h| = radius_from_center``."""
    out = np.exp(log_solution_density(state, radius_from_center))
    return out if np.ndim(out) else float(out)


def fokker_planck_density(params: ModelParams, t: float, radius_from_center):
    """``v(t, x)`` written through the unit profile ``B``.

    ``v = s^(-alpha d) B((x - h) / s^alpha)`` with
    ``s = alpha (1 - exp(-t/alpha))``. This is an independent route to
    :func:`solution_density`.
    """
    t = _check_time(t)
    alpha = params.alpha
    log_s = math.log(alpha) + math.log(-math.expm1(-t / alpha))
    r = np.asarray(radius_from_center, dtype=float)
    out = -alpha * params.d * log_s + log_density_at(params, r * math.exp(-alpha * log_s), "unit")
    out = np.exp(out)
    return out if np.ndim(out) else float(out)


def self_similar_density(params: ModelParams, t: float, radius, x0_norm: float = 0.0):
    """``u(t, x) = t^(-alpha d) B((x - x0) / t^alpha)`` at ``|x - x0| = radius``.

    ``x0_norm`` does not enter since ``u`` is radial about ``x0``; it is kept
    for signature symmetry with the Fokker-Planck densities.
    """
    t = _check_time(t)
    alpha = params.alpha
    r = np.asarray(radius, dtype=float)
    out = -alpha * params.d * math.log(t) + log_density_at(params, r * t ** -alpha, "unit")
    out = np.exp(out)
    return out if np.ndim(out) else float(out)


def radius_R(t: float, alpha: float) -> float:
    """``R(t) = (1 + t/alpha)^alpha``."""
    return math.exp(alpha * math.log1p(t / alpha))


def tau(t: float, alpha: float) -> float:
    """``tau(t) = alpha log(1 + t/alpha)``."""
    return alpha * math.log1p(t / alpha)


def tau_inverse(s: float, alpha: float) -> float:
    """``tau^{-1}(s) = alpha (exp(s/alpha) - 1)``."""
    return alpha * math.expm1(s / alpha)


def change_of_variables_residual(
    params: ModelParams, t: float, radius: float, x0_norm: float, cos_angle: float = 0.3
) -> float:
    """Relative gap between ``u(t, x)`` and ``R^(-d) v(tau, x/R)``.

    ``x`` sits at distance ``radius`` from ``x0``, in a direction making
    angle ``arccos(cos_angle)`` with ``x0``. The right-hand side locates
    ``x / R`` relative to the moving center ``exp(-tau) x0`` through the law
    of cosines, so it does not presuppose ``exp(-tau) = 1/R``.
    Returns 0 where both sides vanish.
    """
    t = _check_time(t)
    alpha = params.alpha
    lhs = self_similar_density(params, t, radius, x0_norm)

    R = radius_R(t, alpha)
    s = tau(t, alpha)
    # x = x0 + radius * e, with <e, x0/|x0|> = cos_angle
    x_par = x0_norm + radius * cos_angle
    x_perp = radius * math.sqrt(max(0.0, 1.0 - cos_angle * cos_angle))
    h = math.exp(-s) * x0_norm
    dist = math.hypot(x_par / R - h, x_perp / R)
    state = flow_state(params, s, x0_norm)
    rhs = R ** -params.d * solution_density(state, dist)
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale
