"""Log-domain Gamma and Beta arithmetic.

Everything here works on real positive arguments and never leaves the log
domain until the caller asks for it, so ratios such as
``Gamma(d/2) / Gamma(d/2 + 1/2)`` stay finite for ``d`` up to ``1e8``.

``log_gamma`` combines three pieces:

* a Taylor series of ``ln Gamma(1 + z)`` in zeta values for ``|z| <= 1/2``,
  which keeps full relative accuracy near the zeros at 1 and 2;
* downward recurrence onto ``[1.5, 2.5)`` for ``2.5 <= x < 10``;
* the Stirling series with Bernoulli corrections for ``x >= 10``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError

__all__ = [
    "LogValue",
    "log_gamma",
    "log_gamma_ratio",
    "log_beta",
    "gamma_ratio_pow",
    "log_gamma_ratio_pow",
    "log_sphere_area",
]

EULER_GAMMA = 0.57721566490153286060651209008240243
_HALF_LOG_2PI = 0.91893853320467274178032973640561764
_STIRLING_MIN = 10.0
_N_STIRLING = 10
_N_TAYLOR = 64
_LOG_MAX = math.log(1.7976931348623157e308)


@lru_cache(maxsize=None)
def _bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2 convention), Akiyama-Tanigawa."""
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
    b = a[0]
    return -b if n == 1 else b


def _zeta_int(s: int, n_direct: int = 12, n_corr: int = 9) -> float:
    # Euler-Maclaurin with n_direct explicit terms
    total = math.fsum(k ** -float(s) for k in range(1, n_direct))
    n = float(n_direct)
    total += n ** (1.0 - s) / (s - 1) + 0.5 * n ** -float(s)
    rising = float(s)
    power = n ** (-float(s) - 1.0)
    for j in range(1, n_corr + 1):
        total += float(_bernoulli(2 * j)) / math.factorial(2 * j) * rising * power
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= n * n
    return total


_TAYLOR = tuple(
    (-1) ** k * _zeta_int(k) / k for k in range(2, _N_TAYLOR + 1)
)
_STIRLING = tuple(
    float(_bernoulli(2 * k)) / (2 * k * (2 * k - 1)) for k in range(1, _N_STIRLING + 1)
)


def _lgamma1p_series(z: float) -> float:
    # ln Gamma(1 + z), |z| <= 1/2
    acc = 0.0
    zk = z * z
    for c in _TAYLOR:
        term = c * zk
        acc += term
        if abs(term) < 1e-19 * max(abs(acc), 1e-300):
            break
        zk *= z
    return -EULER_GAMMA * z + acc


def _stirling_tail(x: float) -> float:
    inv = 1.0 / x
    inv2 = inv * inv
    acc = 0.0
    p = inv
    for c in _STIRLING:
        acc += c * p
        p *= inv2
    return acc


def _check_positive(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {x!r}")
    return x


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for real ``x > 0``.

    Relative error stays below 1e-13 on ``[1e-6, 1e8]``.

    >>> round(log_gamma(0.5), 10)
    0.5723649429
    """
    x = _check_positive(x)
    if x >= _STIRLING_MIN:
        return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + _stirling_tail(x)
    if x < 0.5:
        return _lgamma1p_series(x) - math.log(x)
    if x < 1.5:
        return _lgamma1p_series(x - 1.0)
    if x < 2.5:
        z = x - 2.0
        return math.log1p(z) + _lgamma1p_series(z)
    n = int(math.floor(x - 1.5))
    y = x - n
    prod = 1.0
    for k in range(n):
        prod *= y + k
    return log_gamma(y) + math.log(prod)


def log_gamma_ratio(x: float, y: float) -> float:
    """``ln Gamma(x) - ln Gamma(y)`` without cancelling two large logs.

    For large, close arguments (the typical Barenblatt case, e.g.
    ``x = p - d/2`` and ``y = p``) the leading Stirling terms are combined
    through ``log1p`` before subtraction.
    """
    x = _check_positive(x)
    y = _check_positive(y, "y")
    if x == y:
        return 0.0
    if x >= _STIRLING_MIN and y >= _STIRLING_MIN:
        delta = x - y
        lead = delta * math.log(x) + (y - 0.5) * math.log1p(delta / y) - delta
        return lead + (_stirling_tail(x) - _stirling_tail(y))
    return log_gamma(x) - log_gamma(y)


def log_beta(a: float, b: float) -> float:
    """``ln B(a, b)``; symmetric in its arguments bit for bit."""
    a = _check_positive(a, "a")
    b = _check_positive(b, "b")
    hi, lo = (a, b) if a >= b else (b, a)
    return log_gamma_ratio(hi, hi + lo) + log_gamma(lo)


@dataclass(frozen=True)
class LogValue:
    """A real number held as ``sign * exp(log_magnitude)``."""

    log_magnitude: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0 and self.log_magnitude != -math.inf:
            object.__setattr__(self, "log_magnitude", -math.inf)

    @classmethod
    def from_float(cls, value: float) -> "LogValue":
        if value == 0.0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    @property
    def value(self) -> float:
        """Linear-domain value; ``inf`` when not representable."""
        if self.sign == 0:
            return 0.0
        if self.log_magnitude > _LOG_MAX:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "LogValue") -> "LogValue":
        return LogValue(self.log_magnitude + other.log_magnitude, self.sign * other.sign)

    def __pow__(self, s: float) -> "LogValue":
        if self.sign < 0:
            raise DomainError("real power of a negative LogValue")
        return LogValue(s * self.log_magnitude, self.sign)


def log_gamma_ratio_pow(x: float, y: float, s: float) -> LogValue:
    """``(Gamma(x) / Gamma(y)) ** s`` as a :class:`LogValue`."""
    s = float(s)
    if not math.isfinite(s):
        raise DomainError(f"exponent must be finite, got {s!r}")
    return LogValue(s * log_gamma_ratio(x, y), 1)


def gamma_ratio_pow(x: float, y: float, s: float) -> float:
    """``(Gamma(x) / Gamma(y)) ** s`` evaluated through the log domain.

    Raises
    ------
    OverflowError
        If the result is not representable; use :func:`log_gamma_ratio_pow`.
    """
    lv = log_gamma_ratio_pow(x, y, s)
    if lv.log_magnitude > _LOG_MAX:
        raise OverflowError(
            "gamma ratio power overflows; use log_gamma_ratio_pow for the log-domain value"
        )
    return math.exp(lv.log_magnitude)


def log_sphere_area(d: int) -> float:
    """Log surface area of the unit sphere in R^d: ``2 pi^(d/2) / Gamma(d/2)``."""
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d!r}")
    return math.log(2.0) + 0.5 * d * math.log(math.pi) - log_gamma(0.5 * d)
