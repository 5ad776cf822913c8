"""Monte Carlo samplers for Barenblatt laws and the flow.

Random streams come from numpy's counter-based Philox generator keyed by
``SeedSequence(seed, spawn_key=(stream,))``, so worker ``k`` of a run seeded
with ``seed`` always draws the same numbers regardless of scheduling.

Radial laws, with ``S = b|X|^2 / c``:

* full space: ``S ~ BetaPrime(d/2, p - d/2)``, drawn as a ratio of Gammas;
* compact: ``S ~ Beta(d/2, p + 1)``;
* Gaussian: ``X ~ N(0, sigma^2 I)``.

Directions are normalized standard Gaussian vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..barenblatt import ModelParams, Regime, support_radius
from ..dynamics import flow_state
from ..errors import DomainError

__all__ = [
    "SampleCloud",
    "rng_stream",
    "sample_barenblatt",
    "sample_flow",
    "student_t_fixture",
    "projected_sphere_fixture",
]


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for worker ``stream`` of ``seed``."""
    if seed < 0 or stream < 0:
        raise DomainError("seed and stream must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(stream),))))


@dataclass(frozen=True)
class SampleCloud:
    """``n`` points in ``R^d`` with their provenance."""

    points: np.ndarray
    seed: int
    stream: int = 0
    params: Optional[ModelParams] = None
    center: np.ndarray = field(default_factory=lambda: np.zeros(0))
    label: str = ""

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def _directions(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1)
    # a zero Gaussian vector has probability 0; redraw defensively
    while np.any(norms == 0.0):
        bad = norms == 0.0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    return g / norms[:, None]


def _radii(params: ModelParams, n: int, rng: np.random.Generator, which: str) -> np.ndarray:
    d = params.d
    stationary = which in ("stationary", "v_inf")
    if params.regime is Regime.GAUSSIAN:
        sigma = 1.0 if stationary else math.sqrt(2.0)
        return sigma * np.sqrt(rng.chisquare(d, size=n))
    scale = params.b if stationary else params.alpha * params.b
    log_c = params.log_c_stat if stationary else params.log_c
    g1 = rng.standard_gamma(0.5 * d, size=n)
    if params.regime is Regime.FAST_DIFFUSION:
        if params.p <= 0.5 * d:
            raise DomainError("full-space sampling needs p > d/2")
        g2 = rng.standard_gamma(params.p - 0.5 * d, size=n)
        s = g1 / g2
        return np.sqrt(s * math.exp(log_c - math.log(scale)))
    g2 = rng.standard_gamma(params.p + 1.0, size=n)
    s = g1 / (g1 + g2)
    R = support_radius(params, "stationary" if stationary else "unit")
    return R * np.sqrt(s)


def sample_barenblatt(
    params: ModelParams,
    n: int,
    x0=None,
    seed: int = 0,
    *,
    which: str = "stationary",
    stream: int = 0,
) -> SampleCloud:
    """I.i.d. draws from ``v_inf`` (default) or the unit profile ``B``, shifted by ``x0``."""
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    d = params.d
    center = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float).reshape(d)
    rng = rng_stream(seed, stream)
    r = _radii(params, n, rng, which)
    pts = _directions(rng, n, d) * r[:, None] + center
    return SampleCloud(pts, int(seed), int(stream), params, center, f"barenblatt:{which}")


def sample_flow(
    params: ModelParams, t: float, x0_norm: float, n: int, seed: int = 0, *, stream: int = 0
) -> SampleCloud:
    """Draws from ``v(t, .)`` started at ``x0 = x0_norm e_1``: ``a X + h`` with ``X ~ v_inf``."""
    state = flow_state(params, t, x0_norm)
    base = sample_barenblatt(params, n, None, seed, stream=stream)
    h = np.zeros(params.d)
    h[0] = state.h_norm
    pts = state.a * base.points + h
    return SampleCloud(pts, int(seed), int(stream), params, h, "flow")


def student_t_fixture(params: ModelParams, n: int, seed: int = 0, *, stream: int = 0) -> SampleCloud:
    """``v_inf`` in the fast regime as a multivariate Student t.

    ``X = Y / sqrt(Z / r)`` with ``Y ~ N(0, sigma^2 I)``, ``Z ~ chi^2(r)``,
    ``r = 2p - d`` degrees of freedom and ``sigma^2 = C / (b r)``.
    """
    if params.regime is not Regime.FAST_DIFFUSION:
        raise DomainError("the Student t construction needs the fast-diffusion regime")
    r = 2.0 * params.p - params.d
    sigma2 = math.exp(params.log_c_stat - math.log(params.b) - math.log(r))
    rng = rng_stream(seed, stream)
    y = rng.standard_normal((int(n), params.d)) * math.sqrt(sigma2)
    z = rng.chisquare(r, size=int(n))
    pts = y / np.sqrt(z / r)[:, None]
    return SampleCloud(pts, int(seed), int(stream), params, np.zeros(params.d), "student_t")


def projected_sphere_fixture(params: ModelParams, n: int, seed: int = 0, *, stream: int = 0) -> SampleCloud:
    """``v_inf`` in the porous regime as a projection of the uniform law on a sphere.

    The first ``d`` coordinates of a uniform point on the sphere of radius
    ``R`` in ``R^D`` have density proportional to
    ``(R^2 - |x|^2)^((D - d - 2)/2)``. This matches ``v_inf`` when
    ``D = 2p + d + 2`` is an integer.
    """
    if params.regime is not Regime.POROUS_MEDIUM:
        raise DomainError("the projected-sphere construction needs the porous regime")
    D_real = 2.0 * params.p + params.d + 2.0
    D = int(round(D_real))
    if abs(D - D_real) > 1e-9:
        raise DomainError(f"ambient dimension 2p + d + 2 = {D_real!r} is not an integer")
    R = support_radius(params)
    rng = rng_stream(seed, stream)
    u = _directions(rng, int(n), D)
    pts = R * u[:, : params.d]
    return SampleCloud(pts, int(seed), int(stream), params, np.zeros(params.d), "projected_sphere")
