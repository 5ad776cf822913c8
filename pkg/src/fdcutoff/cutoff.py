"""Cutoff schedules, dimension sweeps and trend classification.

For a family of parameters indexed by ``d`` (fixed ``alpha``, or fixed ``m``)
and worst-case initial data on the ball ``|x0| <= r d^theta``, each metric is
evaluated at ``t_d = (1 -/+ eps) k ln d``. Below the critical time the
distances blow up with ``d``; above it they vanish.

Every metric is non-decreasing in ``|x0|``, so the supremum over the ball is
the value at ``|x0| = r d^theta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .barenblatt import ModelParams, moment, params_from_alpha, params_from_m
from .divergences import entropy_flow, fisher_flow, w2_sq_flow
from .dynamics import log_scale_factor_deficit
from .errors import DomainError, InfiniteMoment, InsufficientData

__all__ = [
    "Mode",
    "Side",
    "Metric",
    "Verdict",
    "ScheduleSpec",
    "CutoffScanRow",
    "TrendFit",
    "critical_time",
    "params_for",
    "evaluate_metric",
    "sup_distance",
    "scan",
    "trend_fit",
    "predicted_slope",
    "fixed_m_log10_term_ratio",
    "DEFAULT_DIMS",
]

DEFAULT_DIMS = (10**2, 10**3, 10**4, 10**5, 10**6)
SLOPE_THRESHOLD = 0.05
R2_THRESHOLD = 0.9


class Mode(str, enum.Enum):
    FIXED_ALPHA = "fixed_alpha"
    FIXED_M = "fixed_m"


class Side(str, enum.Enum):
    BELOW = "below"
    ABOVE = "above"

    @property
    def sign(self) -> int:
        return -1 if self is Side.BELOW else 1


class Metric(str, enum.Enum):
    W2_SQ = "w2_sq"
    ENTROPY = "entropy"
    FISHER = "fisher"


class Verdict(str, enum.Enum):
    DIVERGES = "diverges"
    VANISHES = "vanishes"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ScheduleSpec:
    """Schedule ``t_d = (1 -/+ eps) k ln d`` with ``k`` set by the mode.

    ``value`` is ``alpha`` in fixed-alpha mode and ``m`` in fixed-m mode.
    ``eps = 0`` is accepted so the critical time itself can be evaluated.
    """

    mode: Mode
    value: float
    eps: float = 0.2
    r: float = 1.0
    theta: float = 0.5
    side: Side = Side.BELOW

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "side", Side(self.side))
        if not 0.0 <= self.eps < 1.0:
            raise DomainError(f"eps must lie in [0, 1), got {self.eps!r}")
        if not self.theta >= 0.0:
            raise DomainError(f"theta must be >= 0, got {self.theta!r}")
        if not self.r >= 0.0 or not math.isfinite(self.r):
            raise DomainError(f"r must be finite and >= 0, got {self.r!r}")
        if not self.value > 0.0:
            raise DomainError(f"schedule parameter must be > 0, got {self.value!r}")
        if self.mode is Mode.FIXED_M and not self.value > 1.0:
            raise DomainError(f"fixed-m schedules need m > 1, got {self.value!r}")

    def with_side(self, side) -> "ScheduleSpec":
        return ScheduleSpec(self.mode, self.value, self.eps, self.r, self.theta, Side(side))

    @property
    def rate(self) -> float:
        """``k`` in ``t_d = (1 -/+ eps) k ln d``."""
        if self.mode is Mode.FIXED_ALPHA:
            return max(0.5 * self.value, self.theta)
        return self.theta


def critical_time(d: int, spec: ScheduleSpec) -> float:
    """``t_d = (1 + sign * eps) * k * ln d``.

    ``k = max(alpha/2, theta)`` at fixed ``alpha`` (``max(1, alpha)/2`` when
    ``theta = 1/2``) and ``k = theta`` at fixed ``m``.

    >>> round(critical_time(100, ScheduleSpec("fixed_alpha", 2.0, eps=0.0)), 5)
    4.60517
    """
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d!r}")
    return (1.0 + spec.side.sign * spec.eps) * spec.rate * math.log(d)


def params_for(d: int, spec: ScheduleSpec) -> ModelParams:
    if spec.mode is Mode.FIXED_ALPHA:
        return params_from_alpha(d, spec.value)
    return params_from_m(d, spec.value)


def evaluate_metric(params: ModelParams, t: float, x0_norm: float, metric) -> float:
    """One closed-form metric; ``math.inf`` when the profile lacks a second moment."""
    metric = Metric(metric)
    if metric is Metric.W2_SQ:
        return w2_sq_flow(params, t, x0_norm)
    if metric is Metric.FISHER:
        return fisher_flow(params, t, x0_norm)
    try:
        return entropy_flow(params, t, x0_norm)
    except InfiniteMoment:
        return math.inf


def sup_distance(params: ModelParams, t: float, r: float, theta: float, metric) -> float:
    """Supremum of ``metric`` over ``|x0| <= r d^theta``, attained on the boundary."""
    return evaluate_metric(params, t, r * params.d ** theta, metric)


@dataclass(frozen=True)
class CutoffScanRow:
    d: int
    side: Side
    eps: float
    t: float
    metric: Metric
    sup_dist: float
    x0_norm: float
    mode: Mode
    value: float
    r: float
    theta: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.sup_dist)


def scan(
    spec: ScheduleSpec,
    dims: Sequence[int] = DEFAULT_DIMS,
    metrics: Iterable = (Metric.W2_SQ, Metric.ENTROPY, Metric.FISHER),
    sides: Optional[Iterable] = None,
) -> List[CutoffScanRow]:
    """One row per ``(d, side, metric)``, ordered by ``d``, then side, then metric."""
    dims = list(dims)
    if not dims:
        raise DomainError("dims must not be empty")
    if any(int(d) != d or d < 3 for d in dims):
        raise DomainError("every dimension must be an integer >= 3")
    if dims != sorted(dims):
        raise DomainError("dims must be sorted ascending")
    metrics = [Metric(m) for m in metrics]
    sides = [spec.side] if sides is None else [Side(s) for s in sides]
    rows = []
    for d in dims:
        d = int(d)
        params = params_for(d, spec)
        x0 = spec.r * d ** spec.theta
        for side in sides:
            s = spec.with_side(side)
            t = critical_time(d, s)
            for metric in metrics:
                rows.append(
                    CutoffScanRow(
                        d=d, side=side, eps=spec.eps, t=t, metric=metric,
                        sup_dist=evaluate_metric(params, t, x0, metric), x0_norm=x0,
                        mode=spec.mode, value=spec.value, r=spec.r, theta=spec.theta,
                    )
                )
    return rows


@dataclass(frozen=True)
class TrendFit:
    slope: float
    intercept: float
    r_squared: float
    verdict: Verdict
    n_points: int


def trend_fit(rows: Sequence[CutoffScanRow]) -> TrendFit:
    """Least-squares slope of ``ln sup_dist`` against ``ln d``.

    ``diverges`` if slope > 0.05 and r^2 > 0.9, ``vanishes`` if
    slope < -0.05 and r^2 > 0.9, otherwise ``inconclusive``.

    Raises
    ------
    InsufficientData
        Fewer than three finite, positive points.
    """
    keys = {(r.metric, r.side) for r in rows}
    if len(keys) > 1:
        raise DomainError("trend_fit needs rows of a single (metric, side)")
    pts = [(r.d, r.sup_dist) for r in rows if math.isfinite(r.sup_dist) and r.sup_dist > 0.0]
    if len(pts) < 3:
        raise InsufficientData(f"need >= 3 finite points, got {len(pts)}")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    if sxx == 0.0:
        raise InsufficientData("need at least two distinct dimensions")
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    ss_res = float(np.sum((y - intercept - slope * x) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    if slope > SLOPE_THRESHOLD and r2 > R2_THRESHOLD:
        verdict = Verdict.DIVERGES
    elif slope < -SLOPE_THRESHOLD and r2 > R2_THRESHOLD:
        verdict = Verdict.VANISHES
    else:
        verdict = Verdict.INCONCLUSIVE
    return TrendFit(slope, intercept, r2, verdict, len(pts))


def predicted_slope(spec: ScheduleSpec) -> float:
    """Dominant-term growth exponent of the sup distance in ``d``.

    With ``t = k' ln d``, the profile term scales like ``d e^(-2t/alpha)``
    and the initial-data term like ``d^(2 theta) e^(-2t)``; the exponent is
    the larger of ``1 - 2k'/alpha`` and ``2 theta - 2k'``. At fixed ``m``
    the profile term is super-polynomially small and only the second counts.
    """
    k = (1.0 + spec.side.sign * spec.eps) * spec.rate
    x0_exp = 2.0 * spec.theta - 2.0 * k
    if spec.mode is Mode.FIXED_M:
        return x0_exp
    return max(1.0 - 2.0 * k / spec.value, x0_exp)


def fixed_m_log10_term_ratio(d: int, spec: ScheduleSpec) -> float:
    """``log10`` of ``|x0|^2 e^(-2t) / (M_2 (1 - a)^2)`` at ``t = t_d``.

    The two terms of the exact fixed-``m`` Wasserstein distance; both are
    computed in the log domain since ``1 - a`` underflows for large ``d``.
    """
    if spec.mode is not Mode.FIXED_M:
        raise DomainError("term ratio is defined for fixed-m schedules")
    params = params_for(d, spec)
    t = critical_time(d, spec)
    x0 = spec.r * d ** spec.theta
    if x0 == 0.0:
        return -math.inf
    log_x0_term = 2.0 * math.log(x0) - 2.0 * t
    log_profile_term = math.log(moment(params, 2.0)) + 2.0 * log_scale_factor_deficit(t, params.alpha)
    return (log_x0_term - log_profile_term) / math.log(10.0)
