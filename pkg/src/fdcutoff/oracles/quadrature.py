"""Adaptive Gauss-Kronrod quadrature for radial and off-center integrands.

The 1-D engine is a globally adaptive G7-K15 rule: the interval with the
largest error estimate is bisected until the summed estimate meets the
tolerance. Integrands are called with numpy arrays of nodes.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import ConvergenceError, DomainError
from ..special import log_gamma

__all__ = [
    "QuadratureResult",
    "integrate",
    "radial_quadrature",
    "offcenter_quadrature",
    "sphere_area",
]

# QUADPACK G7-K15 abscissae (nonnegative half) and weights
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_W15 = np.concatenate([_WK[:-1], _WK[::-1]])
_W7 = np.zeros(15)
_W7[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    subdivisions: int

    def __float__(self) -> float:
        return self.value


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere ``S^{d-1}`` in ``R^d``."""
    return math.exp(math.log(2.0) + 0.5 * d * math.log(math.pi) - log_gamma(0.5 * d))


def _kronrod(f, a: float, b: float):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = np.asarray(f(mid + half * _NODES), dtype=float)
    if y.shape != (15,):
        y = np.broadcast_to(y, (15,))
    if not np.all(np.isfinite(y)):
        raise DomainError(f"integrand is not finite on [{a!r}, {b!r}]")
    k = half * float(_W15 @ y)
    g = half * float(_W7 @ y)
    return k, abs(k - g)


def _finite_pieces(f, a: float, b: float, breakpoints: Sequence[float]):
    pts = sorted({a, b, *[float(x) for x in breakpoints if a < x < b]})
    return [(f, lo, hi) for lo, hi in zip(pts[:-1], pts[1:]) if hi > lo]


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    abs_tol: float = 1e-14,
    rel_tol: float = 1e-11,
    breakpoints: Sequence[float] = (),
    scale: float = 1.0,
    max_subdivisions: int = 10_000,
) -> QuadratureResult:
    """Integrate ``f`` over ``[a, b]`` with ``b`` possibly ``inf``.

    A semi-infinite tail ``[c, inf)`` beyond the last breakpoint is mapped to
    ``[0, 1)`` by ``x = c + scale * s / (1 - s)``.

    Raises
    ------
    ConvergenceError
        If the tolerance is not met within ``max_subdivisions`` bisections.
    """
    a = float(a)
    b = float(b)
    if not math.isfinite(a):
        raise DomainError("lower limit must be finite")
    if b < a:
        raise DomainError("upper limit must be >= lower limit")
    if b == a:
        return QuadratureResult(0.0, 0.0, 0)

    pieces = []
    if math.isinf(b):
        finite_bp = [x for x in breakpoints if a < x < math.inf]
        c = max(finite_bp) if finite_bp else a
        pieces += _finite_pieces(f, a, c, finite_bp)

        def tail(s, c=c):
            s = np.asarray(s, dtype=float)
            one_minus = 1.0 - s
            x = c + scale * s / one_minus
            return np.asarray(f(x), dtype=float) * scale / (one_minus * one_minus)

        pieces.append((tail, 0.0, 1.0))
    else:
        pieces += _finite_pieces(f, a, b, breakpoints)

    heap = []
    total = 0.0
    err = 0.0
    counter = 0
    for g, lo, hi in pieces:
        k, e = _kronrod(g, lo, hi)
        total += k
        err += e
        heapq.heappush(heap, (-e, counter, g, lo, hi, k))
        counter += 1

    subdivisions = 0
    while err > max(abs_tol, rel_tol * abs(total)):
        if subdivisions >= max_subdivisions:
            raise ConvergenceError(
                f"quadrature did not converge in {max_subdivisions} subdivisions",
                best_estimate=total,
                error_estimate=err,
            )
        neg_e, _, g, lo, hi, k = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise ConvergenceError(
                "interval width reached machine precision", best_estimate=total, error_estimate=err
            )
        k1, e1 = _kronrod(g, lo, mid)
        k2, e2 = _kronrod(g, mid, hi)
        total += k1 + k2 - k
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, counter, g, lo, mid, k1))
        heapq.heappush(heap, (-e2, counter + 1, g, mid, hi, k2))
        counter += 2
        subdivisions += 1
    # re-sum to shed accumulated drift from the running updates
    total = math.fsum(item[5] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return QuadratureResult(total, err, subdivisions)


def radial_quadrature(
    f: Callable[[np.ndarray], np.ndarray],
    d: int,
    *,
    upper: float = math.inf,
    tol: float = 1e-11,
    scale: float = 1.0,
    singular_edge: bool = False,
    breakpoints: Sequence[float] = (),
    abs_tol: float = 0.0,
    max_subdivisions: int = 10_000,
) -> QuadratureResult:
    """``|S^{d-1}| * int_0^upper f(r) r^(d-1) dr`` for a radial function ``f``.

    Parameters
    ----------
    f : callable
        Radial profile, vectorized in ``r``.
    d : int
        Dimension.
    upper : float
        Support radius, or ``inf``.
    tol : float
        Relative tolerance.
    scale : float
        Length scale for the ``r = scale * s / (1 - s)`` map of infinite ranges.
    singular_edge : bool
        For compact supports whose profile has an unbounded derivative at
        ``upper``: the outer half ``[upper/2, upper]`` is integrated in
        ``w = sqrt(upper^2 - r^2)``.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d!r}")
    area = sphere_area(d)
    atol = max(abs_tol / area, 1e-300)

    def g(r):
        r = np.asarray(r, dtype=float)
        return np.asarray(f(r), dtype=float) * r ** (d - 1)

    if math.isinf(upper) or not singular_edge:
        res = integrate(
            g, 0.0, upper, rel_tol=tol, abs_tol=atol, scale=scale,
            breakpoints=breakpoints, max_subdivisions=max_subdivisions,
        )
        return QuadratureResult(area * res.value, area * res.abs_error_estimate, res.subdivisions)

    R = float(upper)
    inner = integrate(
        g, 0.0, 0.5 * R, rel_tol=tol, abs_tol=atol,
        breakpoints=[x for x in breakpoints if x < 0.5 * R], max_subdivisions=max_subdivisions,
    )

    def edge(w):
        w = np.asarray(w, dtype=float)
        r = np.sqrt(np.maximum(R * R - w * w, 0.0))
        return np.asarray(f(r), dtype=float) * r ** (d - 2) * w

    outer = integrate(
        edge, 0.0, R * math.sqrt(0.75), rel_tol=tol, abs_tol=atol,
        max_subdivisions=max_subdivisions,
    )
    value = area * (inner.value + outer.value)
    error = area * (inner.abs_error_estimate + outer.abs_error_estimate)
    if error > max(tol * abs(value), abs_tol, 1e-300):
        raise ConvergenceError("radial quadrature missed tolerance", value, error)
    return QuadratureResult(value, error, inner.subdivisions + outer.subdivisions)


def offcenter_quadrature(
    g: Callable[[float, np.ndarray], np.ndarray],
    d: int,
    *,
    upper: float = math.inf,
    radial_breakpoints: Sequence[float] = (),
    angle_breakpoints: Callable[[float], Sequence[float]] | None = None,
    tol: float = 1e-10,
    scale: float = 1.0,
    abs_tol: float = 0.0,
    max_subdivisions: int = 10_000,
) -> QuadratureResult:
    """Integrate ``G(rho, cos theta)`` over ``R^d`` in polar coordinates.

    Computes ``|S^{d-2}| int_0^upper rho^(d-1) int_0^pi G(rho, cos th)
    sin(th)^(d-2) dth drho``, the reduction of an integrand that depends on
    ``|x|`` and on the angle to a fixed axis. For ``d = 1`` the angular
    integral is replaced by the sum over ``cos th = +1, -1``.

    ``g(rho, z)`` receives a scalar radius and an array of cosines.
    ``angle_breakpoints(rho)`` may return angles in ``(0, pi)`` where the
    integrand has a kink (support boundaries).
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d!r}")

    if d == 1:
        pm = np.array([1.0, -1.0])

        def radial(rho):
            rho = np.atleast_1d(np.asarray(rho, dtype=float))
            return np.array([float(np.sum(g(r, pm))) for r in rho])

        return integrate(
            radial, 0.0, upper, rel_tol=tol, abs_tol=max(abs_tol, 1e-300), scale=scale,
            breakpoints=radial_breakpoints, max_subdivisions=max_subdivisions,
        )

    log_area = math.log(2.0) + 0.5 * (d - 1) * math.log(math.pi) - log_gamma(0.5 * (d - 1))
    area = math.exp(log_area)
    atol = max(abs_tol / area, 1e-300)
    inner_tol = 0.1 * tol

    def angular(rho: float) -> float:
        def h(th):
            th = np.asarray(th, dtype=float)
            s = np.sin(th)
            return np.asarray(g(rho, np.cos(th)), dtype=float) * s ** (d - 2)

        bps = angle_breakpoints(rho) if angle_breakpoints is not None else ()
        return integrate(
            h, 0.0, math.pi, rel_tol=inner_tol, abs_tol=1e-300,
            breakpoints=bps, max_subdivisions=max_subdivisions,
        ).value

    def radial(rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        return np.array([angular(float(r)) * float(r) ** (d - 1) for r in rho])

    res = integrate(
        radial, 0.0, upper, rel_tol=tol, abs_tol=atol, scale=scale,
        breakpoints=radial_breakpoints, max_subdivisions=max_subdivisions,
    )
    return QuadratureResult(area * res.value, area * res.abs_error_estimate, res.subdivisions)
