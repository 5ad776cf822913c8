"""Barenblatt profiles: parameters, normalization, moments and L^m norms.

Two profiles share one parameter record:

* the unit-time profile ``B(x) = (c + alpha*b*|x|^2)^(-p)`` (fast diffusion,
  ``m < 1``) or ``(c - alpha*b*|x|^2)_+^p`` (porous medium, ``m > 1``);
* the stationary profile ``v_inf(x) = alpha^(-alpha d) B(x / alpha^alpha)``,
  which is the same family with scale ``b`` and constant ``C``.

Here ``p = 1/|1 - m|`` and ``b = |1 - m| / (2m)``. At ``m = 1`` both are
Gaussian: ``B = N(0, 2 I)`` and ``v_inf = N(0, I)``.

Every constant is assembled in the log domain so that ``d`` up to ``1e6``
is cheap and exact-formula.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import ConstraintError, DomainError, InfiniteMoment
from .special import log_gamma, log_gamma_ratio, log_gamma_ratio_pow

__all__ = [
    "Regime",
    "ModelParams",
    "AsymptoticTargets",
    "GAUSSIAN_TOL",
    "params_from_alpha",
    "params_from_m",
    "normalization_constant",
    "log_normalization_constant",
    "profile_log_moment",
    "profile_log_lm_norm",
    "radial_log_moment",
    "moment",
    "log_moment",
    "lm_norm",
    "log_lm_norm",
    "moment_gap",
    "lm_moment_ratio",
    "density_at",
    "log_density_at",
    "support_radius",
    "asymptotic_targets",
]

GAUSSIAN_TOL = 1e-12
_LOG_PI = math.log(math.pi)
TWO_PI_E = 2.0 * math.pi * math.e


class Regime(str, enum.Enum):
    FAST_DIFFUSION = "fast_diffusion"
    GAUSSIAN = "gaussian"
    POROUS_MEDIUM = "porous_medium"

    @property
    def compact(self) -> bool:
        return self is Regime.POROUS_MEDIUM


@dataclass(frozen=True)
class ModelParams:
    """All constants derived from one ``(d, m)`` pair.

    Attributes
    ----------
    d : int
        Dimension.
    m : float
        Nonlinearity exponent.
    alpha : float
        ``1 / (2 - d(1 - m))``.
    p : float
        Shape ``1/|1 - m|`` (``inf`` in the Gaussian regime).
    b : float
        Stationary scale ``|1 - m| / (2m)`` (``0`` in the Gaussian regime).
    c, c_stat : float
        Constants of the unit profile ``B`` and of ``v_inf``. In the Gaussian
        regime they are the densities at the origin. They may underflow for
        very large ``d``; ``log_c`` and ``log_c_stat`` never do.
    regime : Regime
    beta : float
        ``|2 alpha - 1|``.
    """

    d: int
    m: float
    alpha: float
    p: float
    b: float
    c: float
    c_stat: float
    log_c: float
    log_c_stat: float
    regime: Regime
    beta: float

    @property
    def has_second_moment(self) -> bool:
        if self.regime is not Regime.FAST_DIFFUSION:
            return True
        return self.m > self.d / (self.d + 2.0)

    @property
    def unit_scale(self) -> float:
        """Quadratic coefficient of the unit-time profile, ``alpha * b``."""
        return self.alpha * self.b

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "alpha": self.alpha,
            "p": self.p,
            "b": self.b,
            "c": self.c,
            "C_stat": self.c_stat,
            "log_c": self.log_c,
            "log_C_stat": self.log_c_stat,
            "regime": self.regime.value,
            "beta": self.beta,
            "has_second_moment": self.has_second_moment,
        }


def _check_dimension(d) -> int:
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise DomainError(f"dimension must be an integer >= 1, got {d!r}")
    return int(d)


def _build(d: int, m: float, alpha: float) -> ModelParams:
    if abs(m - 1.0) <= GAUSSIAN_TOL:
        log_c = -0.5 * d * math.log(4.0 * math.pi)
        log_cs = -0.5 * d * math.log(2.0 * math.pi)
        return ModelParams(
            d=d, m=1.0, alpha=0.5, p=math.inf, b=0.0,
            c=math.exp(log_c), c_stat=math.exp(log_cs),
            log_c=log_c, log_c_stat=log_cs,
            regime=Regime.GAUSSIAN, beta=0.0,
        )
    regime = Regime.FAST_DIFFUSION if m < 1.0 else Regime.POROUS_MEDIUM
    p = 1.0 / abs(1.0 - m)
    b = abs(1.0 - m) / (2.0 * m)
    log_c = log_normalization_constant(d, p, alpha * b, regime)
    log_cs = log_normalization_constant(d, p, b, regime)
    return ModelParams(
        d=d, m=m, alpha=alpha, p=p, b=b,
        c=math.exp(log_c), c_stat=math.exp(log_cs),
        log_c=log_c, log_c_stat=log_cs,
        regime=regime, beta=abs(2.0 * alpha - 1.0),
    )


def params_from_m(d: int, m: float) -> ModelParams:
    """Parameters for a given exponent ``m``.

    Raises
    ------
    ConstraintError
        If ``m <= max(0, (d-2)/d)``.

    Examples
    --------
    >>> params_from_m(3, 1.0).alpha
    0.5
    """
    d = _check_dimension(d)
    m = float(m)
    if not math.isfinite(m):
        raise DomainError(f"m must be finite, got {m!r}")
    if m <= 0.0:
        raise ConstraintError(f"m > 0 violated: m = {m!r}")
    if m <= (d - 2.0) / d:
        raise ConstraintError(
            f"existence constraint m > (d-2)/d violated: m = {m!r}, (d-2)/d = {(d - 2.0) / d!r}"
        )
    alpha = 1.0 / (2.0 - d * (1.0 - m))
    return _build(d, m, alpha)


def params_from_alpha(d: int, alpha: float) -> ModelParams:
    """Parameters for a given ``alpha``, with ``m = ((d-2) alpha + 1) / (d alpha)``.

    Examples
    --------
    >>> params_from_alpha(10, 1.0).m
    0.9
    """
    d = _check_dimension(d)
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise DomainError(f"alpha must be finite and > 0, got {alpha!r}")
    m = ((d - 2) * alpha + 1.0) / (d * alpha)
    if m <= 0.0:
        raise ConstraintError(
            f"m > 0 violated: alpha = {alpha!r} gives m = {m!r} in dimension {d}"
        )
    if m <= (d - 2.0) / d:
        raise ConstraintError(
            f"existence constraint m > (d-2)/d violated: alpha = {alpha!r} gives m = {m!r}"
        )
    return _build(d, m, alpha)


# ---------------------------------------------------------------------------
# generic profiles: (c + b r^2)^(-p) or (c - b r^2)_+^p with explicit (d, p, b)


def log_normalization_constant(d: int, p: float, b: float, regime: Regime) -> float:
    """Log of the ``c`` that makes the generic profile a probability density."""
    regime = Regime(regime)
    if b <= 0.0:
        raise DomainError(f"scale b must be > 0, got {b!r}")
    if regime is Regime.GAUSSIAN:
        raise DomainError("the Gaussian regime has no (p, b) normalization")
    if regime is Regime.FAST_DIFFUSION:
        if p <= d / 2.0:
            raise ConstraintError(f"full-space normalization needs p > d/2: p = {p!r}, d = {d}")
        inner = 0.5 * d * _LOG_PI + log_gamma_ratio(p - 0.5 * d, p) - 0.5 * d * math.log(b)
        return 2.0 / (2.0 * p - d) * inner
    if p <= 0.0:
        raise ConstraintError(f"compact normalization needs p > 0: p = {p!r}")
    inner = 0.5 * d * math.log(b) + log_gamma_ratio(p + 1.0 + 0.5 * d, p + 1.0) - 0.5 * d * _LOG_PI
    return 2.0 / (2.0 * p + d) * inner


def normalization_constant(d: int, p: float, b: float, regime: Regime) -> float:
    """``c`` such that ``(c + b|x|^2)^(-p)`` or ``(c - b|x|^2)_+^p`` has unit mass.

    Examples
    --------
    >>> round(normalization_constant(2, 2.0, 1.0, Regime.FAST_DIFFUSION), 12)
    3.14159265359
    """
    return math.exp(log_normalization_constant(d, p, b, regime))


def profile_log_moment(d: int, p: float, b: float, regime: Regime, a: float) -> float:
    """Log of ``int |x|^a B`` for the normalized generic profile."""
    regime = Regime(regime)
    a = float(a)
    if a < 0.0:
        raise DomainError(f"moment order must be >= 0, got {a!r}")
    if regime is Regime.FAST_DIFFUSION:
        log_normalization_constant(d, p, b, regime)
        if p <= 0.5 * (d + a):
            raise InfiniteMoment(
                f"full-space moment of order {a} diverges: needs p > (d+a)/2, p = {p!r}, d = {d}"
            )
        inner = 0.5 * d * _LOG_PI + log_gamma_ratio(p - 0.5 * d, p) - p * math.log(b)
        return (
            a / (2.0 * p - d) * inner
            + log_gamma_ratio(0.5 * (d + a), 0.5 * d)
            + log_gamma_ratio(p - 0.5 * (d + a), p - 0.5 * d)
        )
    if regime is Regime.POROUS_MEDIUM:
        log_normalization_constant(d, p, b, regime)
        inner = log_gamma_ratio(p + 1.0 + 0.5 * d, p + 1.0) - 0.5 * d * _LOG_PI - p * math.log(b)
        return (
            a / (d + 2.0 * p) * inner
            + log_gamma_ratio(p + 1.0 + 0.5 * d, p + 1.0 + 0.5 * (d + a))
            + log_gamma_ratio(0.5 * (d + a), 0.5 * d)
        )
    raise DomainError("use moment() for the Gaussian regime")


def profile_log_lm_norm(d: int, p: float, b: float, m: float, regime: Regime) -> float:
    """Log of ``int B^m`` for the normalized generic profile."""
    regime = Regime(regime)
    if regime is Regime.FAST_DIFFUSION:
        log_normalization_constant(d, p, b, regime)
        if p * m <= 0.5 * d:
            raise ConstraintError(f"L^m norm needs p > d/(2m): p = {p!r}, d/(2m) = {d / (2.0 * m)!r}")
        w = 1.0 / (2.0 * p - d)
        return (
            d * p * (1.0 - m) * w * (_LOG_PI - math.log(b))
            + log_gamma_ratio_pow(p, p - 0.5 * d, (2.0 * p * m - d) * w).log_magnitude
            + log_gamma_ratio(p * m - 0.5 * d, p * m)
        )
    if regime is Regime.POROUS_MEDIUM:
        log_normalization_constant(d, p, b, regime)
        if m < 0.0:
            raise ConstraintError(f"compact L^m norm needs m >= 0: m = {m!r}")
        inner = 0.5 * d * (math.log(b) - _LOG_PI) + log_gamma_ratio(p + 1.0 + 0.5 * d, p + 1.0)
        return (
            log_gamma_ratio(p + 1.0 + 0.5 * d, p * m + 1.0 + 0.5 * d)
            + log_gamma_ratio(p * m + 1.0, p + 1.0)
            + 2.0 * p * (m - 1.0) / (2.0 * p + d) * inner
        )
    raise DomainError("use lm_norm() for the Gaussian regime")


def radial_log_moment(d: int, p: float, b: float, c: float, regime: Regime, a: float) -> float:
    """Log of ``int |x|^a B`` for an arbitrary constant ``c`` (not normalized).

    Spherical coordinates plus one Euler Beta integral. With the ``c`` from
    :func:`normalization_constant` this is an independent route to
    :func:`profile_log_moment`.
    """
    regime = Regime(regime)
    if c <= 0.0 or b <= 0.0:
        raise DomainError("c and b must be > 0")
    h = 0.5 * (d + a)
    log_sphere = math.log(2.0) + 0.5 * d * _LOG_PI - log_gamma(0.5 * d)
    if regime is Regime.FAST_DIFFUSION:
        if p <= h:
            raise InfiniteMoment(f"moment of order {a} diverges: needs p > (d+a)/2")
        # int_0^inf r^(d+a-1) (c + b r^2)^(-p) dr = (c/b)^h c^(-p) B(h, p-h) / 2
        return (
            log_sphere + h * (math.log(c) - math.log(b)) - p * math.log(c)
            + log_gamma(h) + log_gamma_ratio(p - h, p) - math.log(2.0)
        )
    # int_0^R r^(d+a-1) (c - b r^2)^p dr = (c/b)^h c^p B(h, p+1) / 2
    return (
        log_sphere + h * (math.log(c) - math.log(b)) + p * math.log(c)
        + log_gamma(h) + log_gamma_ratio(p + 1.0, p + 1.0 + h) - math.log(2.0)
    )


# ---------------------------------------------------------------------------
# ModelParams-level API


def _is_stationary(which: str) -> bool:
    if which in ("stationary", "v_inf", "stationary_v_inf"):
        return True
    if which in ("unit", "B", "unit_profile_B"):
        return False
    raise DomainError(f"which must be 'stationary' or 'unit', got {which!r}")


def _which_scale(params: ModelParams, which: str) -> float:
    return params.b if _is_stationary(which) else params.alpha * params.b


def _gaussian_log_moment(d: int, a: float, var: float) -> float:
    # E|Z|^a for Z ~ N(0, var I)
    return 0.5 * a * math.log(2.0 * var) + log_gamma_ratio(0.5 * (d + a), 0.5 * d)


def log_moment(params: ModelParams, a: float, which: str = "stationary") -> float:
    """Log of :func:`moment`."""
    a = float(a)
    if not math.isfinite(a) or a < 0.0:
        raise DomainError(f"moment order must be finite and >= 0, got {a!r}")
    if params.regime is Regime.GAUSSIAN:
        var = 1.0 if _is_stationary(which) else 2.0
        return _gaussian_log_moment(params.d, a, var)
    return profile_log_moment(params.d, params.p, _which_scale(params, which), params.regime, a)


def moment(params: ModelParams, a: float, which: str = "stationary") -> float:
    """``M_a = int |x|^a rho(x) dx`` for ``rho = v_inf`` (default) or ``B``.

    Raises
    ------
    InfiniteMoment
        Full-space profile with ``p <= (d + a)/2``.
    """
    return math.exp(log_moment(params, a, which))


def log_lm_norm(params: ModelParams, which: str = "stationary") -> float:
    """Log of :func:`lm_norm`."""
    if params.regime is Regime.GAUSSIAN:
        _is_stationary(which)
        return 0.0
    return profile_log_lm_norm(
        params.d, params.p, _which_scale(params, which), params.m, params.regime
    )


def lm_norm(params: ModelParams, which: str = "stationary") -> float:
    """``N_m = int rho(x)^m dx`` for ``rho = v_inf`` (default) or ``B``."""
    return math.exp(log_lm_norm(params, which))


def lm_moment_ratio(params: ModelParams) -> Fraction:
    """Exact ``d N_m / M_2`` for ``v_inf``, as a rational in the stored ``m``.

    The Gamma factors of ``M_2`` and ``N_m`` coincide, leaving
    ``d N_m / M_2 = 2 alpha d m b / |2 alpha - 1|``, which reduces to 1 for
    every admissible ``m``. The arithmetic is done in exact rationals so the
    result does not carry rounding noise.
    """
    if params.regime is Regime.GAUSSIAN:
        return Fraction(1)
    if not params.has_second_moment:
        raise InfiniteMoment("v_inf has no second moment: needs m > d/(d+2)")
    m = Fraction(params.m)
    d = params.d
    alpha = 1 / (2 - d * (1 - m))
    b = abs(1 - m) / (2 * m)
    beta = abs(2 * alpha - 1)
    return 2 * alpha * d * m * b / beta


def moment_gap(params: ModelParams, exact: bool = True) -> float:
    """``M_2 - d N_m`` for the stationary profile.

    With ``exact=True`` this is ``M_2 (1 - d N_m / M_2)`` with the ratio from
    :func:`lm_moment_ratio`. With ``exact=False`` it is the plain floating
    point difference, which is pure rounding noise of size ``~1e-16 M_2``.
    """
    if exact:
        return moment(params, 2.0) * float(1 - lm_moment_ratio(params))
    return moment(params, 2.0) - params.d * lm_norm(params)


# ---------------------------------------------------------------------------
# pointwise evaluation


def log_density_at(params: ModelParams, radius, which: str = "stationary"):
    """Log density at distance ``radius`` from the center (``-inf`` off support)."""
    r = np.asarray(radius, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be >= 0")
    r2 = r * r
    if params.regime is Regime.GAUSSIAN:
        if _is_stationary(which):
            out = params.log_c_stat - 0.5 * r2
        else:
            out = params.log_c - 0.25 * r2
        return out if out.ndim else float(out)
    scale = _which_scale(params, which)
    log_c = params.log_c_stat if _is_stationary(which) else params.log_c
    q = scale * r2 * math.exp(-log_c)
    if params.regime is Regime.FAST_DIFFUSION:
        out = -params.p * (log_c + np.log1p(q))
    else:
        # compare radii too, so that r = support_radius(...) maps to exactly 0
        inside = (q < 1.0) & (r < math.exp(0.5 * (log_c - math.log(scale))))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(inside, params.p * (log_c + np.log1p(-np.minimum(q, 1.0))), -np.inf)
    return out if out.ndim else float(out)


def density_at(params: ModelParams, radius, which: str = "stationary"):
    """Density at distance ``radius`` from the center.

    ``which`` selects ``v_inf`` ("stationary") or the unit-time profile ``B``
    ("unit"). Compact profiles are exactly 0 at and beyond the support radius.
    Accepts scalars or arrays.
    """
    out = np.exp(log_density_at(params, radius, which))
    return out if np.ndim(out) else float(out)


def support_radius(params: ModelParams, which: str = "stationary") -> float:
    """Radius of the support: ``sqrt(c / scale)`` when compact, else ``inf``."""
    if params.regime is not Regime.POROUS_MEDIUM:
        return math.inf
    scale = _which_scale(params, which)
    log_c = params.log_c_stat if _is_stationary(which) else params.log_c
    return math.exp(0.5 * (log_c - math.log(scale)))


# ---------------------------------------------------------------------------
# large-d limits


@dataclass(frozen=True)
class AsymptoticTargets:
    m2_over_d_limit: float
    nm_limit: float
    c_over_bd_limit: Optional[float] = None


def asymptotic_targets(
    alpha: Optional[float] = None, m: Optional[float] = None, mode: str = "fixed_alpha"
) -> AsymptoticTargets:
    """Large-``d`` limits of ``M_2 / d``, ``N_m`` and (fixed ``m``) ``C / (b d)``.

    Examples
    --------
    >>> asymptotic_targets(alpha=0.5).nm_limit
    1.0
    """
    if mode == "fixed_alpha":
        if alpha is None or alpha <= 0:
            raise DomainError("fixed_alpha mode needs alpha > 0")
        v = TWO_PI_E ** (2.0 * alpha - 1.0)
        return AsymptoticTargets(v, v)
    if mode == "fixed_m":
        if m is None or m <= 1.0:
            raise DomainError("fixed_m mode needs m > 1")
        v = 1.0 / TWO_PI_E
        return AsymptoticTargets(v, v, v)
    raise DomainError(f"mode must be 'fixed_alpha' or 'fixed_m', got {mode!r}")
