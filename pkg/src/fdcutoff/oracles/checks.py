"""Quadrature oracles for the relative entropy and the Fisher information.

Both integrals are evaluated directly from their defining expressions using
the pointwise densities, independently of the moment-based closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..barenblatt import ModelParams, Regime, log_density_at, support_radius
from ..divergences import entropy_flow, fisher_flow
from ..dynamics import flow_state, log_solution_density
from .quadrature import offcenter_quadrature, radial_quadrature

__all__ = [
    "entropy_quadrature",
    "fisher_quadrature",
    "entropy_production_check",
    "EntropyProductionCheck",
    "moment_quadrature",
    "lm_norm_quadrature",
]


def _angle_breakpoints(h: float, radius: float):
    # angles where |x - h| crosses `radius`, as a function of |x| = rho
    def bps(rho):
        if h <= 0.0 or rho <= 0.0 or not math.isfinite(radius):
            return ()
        z = (rho * rho + h * h - radius * radius) / (2.0 * rho * h)
        if -1.0 < z < 1.0:
            return (math.acos(z),)
        return ()

    return bps


def entropy_quadrature(params: ModelParams, t: float, x0_norm: float, tol: float = 1e-10) -> float:
    """``H_m(v(t) | v_inf)`` by quadrature of its defining integral.

    ``(1/(m-1)) int f^m - v^m - ((1-m)/2)|x|^2 (f - v)`` with ``f = v(t, .)``,
    or ``int f log f - v log v + |x|^2 (f - v)/2`` when ``m = 1``. The
    integrand depends on ``|x|`` and ``|x - h|``, so off-center states use the
    two-variable reduction.
    """
    state = flow_state(params, t, x0_norm)
    m = params.m
    h = state.h_norm
    gauss = params.regime is Regime.GAUSSIAN

    def integrand(rho, dist):
        lf = np.asarray(log_solution_density(state, dist), dtype=float)
        lv = np.asarray(log_density_at(params, rho), dtype=float)
        f = np.exp(lf)
        v = np.exp(lv)
        rho2 = rho * rho
        if gauss:
            flf = np.where(f > 0, f * np.where(f > 0, lf, 0.0), 0.0)
            vlv = np.where(v > 0, v * np.where(v > 0, lv, 0.0), 0.0)
            return flf - vlv + 0.5 * rho2 * (f - v)
        fm = np.exp(m * lf)
        vm = np.exp(m * lv)
        return (fm - vm - 0.5 * (1.0 - m) * rho2 * (f - v)) / (m - 1.0)

    R_inf = support_radius(params)
    R_f = state.support_radius()
    scale = max(1.0, h)
    if params.regime is Regime.POROUS_MEDIUM:
        upper = max(R_inf, h + R_f)
        bps = [x for x in (R_inf, abs(h - R_f), h + R_f, h) if 0.0 < x < upper]
    else:
        upper = math.inf
        bps = [h] if h > 0 else []

    if h == 0.0:
        res = radial_quadrature(
            lambda r: integrand(r, r), params.d, upper=upper, tol=tol,
            breakpoints=bps, scale=scale, abs_tol=1e-15,
        )
        return res.value

    def g(rho, z):
        z = np.asarray(z, dtype=float)
        dist = np.sqrt(np.maximum(rho * rho + h * h - 2.0 * rho * h * z, 0.0))
        return integrand(np.full_like(z, rho), dist)

    res = offcenter_quadrature(
        g, params.d, upper=upper, radial_breakpoints=bps,
        angle_breakpoints=_angle_breakpoints(h, R_f) if math.isfinite(R_f) else None,
        tol=tol, scale=scale, abs_tol=1e-15,
    )
    return res.value


def _pressure_gradient_coefficient(params: ModelParams, a: float) -> float:
    """``k`` with ``(m/(m-1)) grad v^(m-1) = k (x - h)`` on the support of ``v``.

    From ``v^(m-1) = a^(d(1-m)) (C + s |x - h|^2 / a^2)`` with
    ``s = (1 - m)/(2m)``; the Gaussian limit is ``grad log v = -(x - h)/a^2``.
    """
    if params.regime is Regime.GAUSSIAN:
        return -1.0 / (a * a)
    m = params.m
    s = (1.0 - m) / (2.0 * m)
    return m / (m - 1.0) * a ** (params.d * (1.0 - m)) * 2.0 * s / (a * a)


def fisher_quadrature(params: ModelParams, t: float, x0_norm: float, tol: float = 1e-10) -> float:
    """``I_m(v(t) | v_inf) = int v |x + (m/(m-1)) grad v^(m-1)|^2`` by quadrature.

    Polar coordinates are centered at ``h``; the integrand is restricted to
    ``{v > 0}`` in the porous regime.
    """
    state = flow_state(params, t, x0_norm)
    h = state.h_norm
    k = _pressure_gradient_coefficient(params, state.a)
    R_f = state.support_radius()

    def g(rho, z):
        z = np.asarray(z, dtype=float)
        v = np.exp(np.asarray(log_solution_density(state, np.full_like(z, rho)), dtype=float))
        # x = h + y, |y| = rho, <y, h> = rho |h| z
        w = 1.0 + k
        sq = h * h + 2.0 * w * rho * h * z + w * w * rho * rho
        return np.where(v > 0, v * sq, 0.0)

    upper = R_f if math.isfinite(R_f) else math.inf
    res = offcenter_quadrature(
        g, params.d, upper=upper, tol=tol, scale=max(1.0, state.a), abs_tol=1e-15,
    )
    return res.value


@dataclass(frozen=True)
class EntropyProductionCheck:
    dH_dt: float
    minus_I: float
    abs_gap: float
    rel_gap: float


def entropy_production_check(
    params: ModelParams, t: float, x0_norm: float, step: float = 1e-5
) -> EntropyProductionCheck:
    """Central difference of ``H_m`` against ``-I_m`` at time ``t``."""
    if not t > step:
        raise ValueError("t must exceed the finite-difference step")
    dH = (entropy_flow(params, t + step, x0_norm) - entropy_flow(params, t - step, x0_norm)) / (
        2.0 * step
    )
    minus_I = -fisher_flow(params, t, x0_norm)
    gap = abs(dH - minus_I)
    rel = gap / abs(minus_I) if minus_I != 0.0 else (0.0 if gap == 0.0 else math.inf)
    return EntropyProductionCheck(dH, minus_I, gap, rel)


def _profile_quadrature(params: ModelParams, fn, which: str, tol: float) -> float:
    R = support_radius(params, which)
    if params.regime is Regime.GAUSSIAN:
        scale = 1.0
    else:
        log_c = params.log_c_stat if which in ("stationary", "v_inf") else params.log_c
        b = params.b if which in ("stationary", "v_inf") else params.alpha * params.b
        scale = math.exp(0.5 * (log_c - math.log(b)))
    compact = math.isfinite(R)
    res = radial_quadrature(
        fn, params.d, upper=R if compact else math.inf, tol=tol,
        scale=scale, singular_edge=compact,
    )
    return res.value


def moment_quadrature(params: ModelParams, a: float, which: str = "stationary", tol: float = 1e-12) -> float:
    """``int |x|^a v`` by radial quadrature of the pointwise density."""

    def fn(r):
        return np.exp(log_density_at(params, r, which)) * r ** a

    return _profile_quadrature(params, fn, which, tol)


def lm_norm_quadrature(params: ModelParams, which: str = "stationary", tol: float = 1e-12) -> float:
    """``int v^m`` by radial quadrature of the pointwise density."""

    def fn(r):
        return np.exp(params.m * np.asarray(log_density_at(params, r, which)))

    return _profile_quadrature(params, fn, which, tol)
