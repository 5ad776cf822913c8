"""Finite-volume solver for ``d_t v = Lap(v^m) + div(x v)``.

Two geometries are supported: the full line (``d = 1``, any center ``x0``)
and radially symmetric solutions in ``d >= 2`` centered at the origin.

The flux is written in gradient form ``F = v grad xi`` with the chemical
potential

    xi(v, x) = m/(m-1) v^(m-1) + |x|^2/2        (m != 1)
    xi(v, x) = log v + |x|^2/2                  (m = 1)

and upwinded on the sign of ``grad xi``. ``xi`` is constant for ``v_inf``, so
the discrete equilibrium is preserved exactly and the truncation error
vanishes at equilibrium. Zero-flux walls close the domain.

Time stepping is forward Euler (``step``) or backward Euler with Newton
iterations on the tridiagonal Jacobian (``step_implicit``). The latter is
needed in the fast-diffusion regime, where ``m v^(m-1)`` grows without bound
in the tails and forces impractically small explicit steps.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, TextIO

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .barenblatt import ModelParams, Regime, support_radius
from .dynamics import flow_state, solution_density
from .errors import DomainError, ResolutionError, StabilityError
from .oracles.quadrature import sphere_area

__all__ = [
    "GridSpec",
    "GridDensity",
    "Trajectory",
    "init_from_closed_form",
    "closed_form_cell_averages",
    "mass",
    "cfl_dt",
    "step",
    "step_implicit",
    "evolve",
    "discrete_entropy",
    "discrete_equilibrium",
    "l1_error",
    "numerical_front",
    "exact_front",
    "write_trajectory_csv",
    "MIN_CORE_CELLS",
    "MAX_MASS_LOSS",
]

MIN_CORE_CELLS = 16
MAX_MASS_LOSS = 1e-6
CFL_SAFETY = 0.4
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[-extent, extent]`` (line) or ``[0, extent]`` (radial)."""

    geometry: str
    n_cells: int
    extent: float

    def __post_init__(self):
        if self.geometry not in ("line", "radial"):
            raise DomainError(f"geometry must be 'line' or 'radial', got {self.geometry!r}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 4:
            raise DomainError("n_cells must be an integer >= 4")
        if not self.extent > 0.0 or not math.isfinite(self.extent):
            raise DomainError("extent must be finite and > 0")

    @property
    def lower(self) -> float:
        return -self.extent if self.geometry == "line" else 0.0

    @property
    def dx(self) -> float:
        return (self.extent - self.lower) / self.n_cells

    @property
    def faces(self) -> np.ndarray:
        return self.lower + np.arange(self.n_cells + 1) * self.dx

    @property
    def centers(self) -> np.ndarray:
        return self.lower + (np.arange(self.n_cells) + 0.5) * self.dx

    def areas(self, d: int) -> np.ndarray:
        """Face measures ``r^(d-1)`` (all ones on the line)."""
        if self.geometry == "line":
            return np.ones(self.n_cells + 1)
        return self.faces ** (d - 1)

    def volumes(self, d: int) -> np.ndarray:
        """Cell measures ``(r_+^d - r_-^d)/d`` (``dx`` on the line)."""
        if self.geometry == "line":
            return np.full(self.n_cells, self.dx)
        f = self.faces
        return (f[1:] ** d - f[:-1] ** d) / d

    def measure_weight(self, d: int) -> float:
        """Factor turning the radial cell sum into an integral over ``R^d``."""
        return 1.0 if self.geometry == "line" else sphere_area(d)


@dataclass(frozen=True)
class GridDensity:
    """Cell averages of a density at time ``time``.

    ``x0`` is the initial Dirac location (line geometry only); ``mass_lost``
    accumulates mass removed by clipping negative values.
    """

    grid: GridSpec
    values: np.ndarray
    params: ModelParams
    time: float
    x0: float = 0.0
    mass_lost: float = 0.0

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def coordinates(self) -> np.ndarray:
        return self.grid.centers


def _check_geometry(params: ModelParams, grid: GridSpec, x0: float) -> None:
    if grid.geometry == "line" and params.d != 1:
        raise DomainError("line geometry needs d = 1")
    if grid.geometry == "radial":
        if params.d < 2:
            raise DomainError("radial geometry needs d >= 2")
        if x0 != 0.0:
            raise DomainError("radial geometry needs x0 = 0")


def closed_form_cell_averages(params: ModelParams, t: float, x0: float, grid: GridSpec) -> np.ndarray:
    """Cell averages of ``v(t, .)`` by 8-point Gauss-Legendre per cell."""
    _check_geometry(params, grid, x0)
    state = flow_state(params, t, abs(x0))
    h = math.exp(-t) * x0
    f = grid.faces
    lo, hi = f[:-1], f[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * _GAUSS_NODES[None, :]
    if grid.geometry == "line":
        vals = solution_density(state, np.abs(nodes - h))
        return (vals * _GAUSS_WEIGHTS).sum(axis=1) * half / grid.dx
    d = params.d
    vals = solution_density(state, nodes) * nodes ** (d - 1)
    return (vals * _GAUSS_WEIGHTS).sum(axis=1) * half / grid.volumes(d)


def mass(state: GridDensity) -> float:
    g = state.grid
    return g.measure_weight(state.d) * math.fsum(g.volumes(state.d) * state.values)


def init_from_closed_form(params: ModelParams, t0: float, x0: float, grid: GridSpec) -> GridDensity:
    """Discretize the closed-form ``v(t0, .)`` and renormalize to unit mass.

    Raises
    ------
    ResolutionError
        Fewer than 16 cells across the core width ``a(t0) sqrt(c/b)``.
    """
    if not t0 > 0.0:
        raise DomainError("t0 must be > 0")
    _check_geometry(params, grid, x0)
    a = flow_state(params, t0, abs(x0)).a
    if params.regime is Regime.GAUSSIAN:
        core = a
    else:
        core = a * math.exp(0.5 * (params.log_c_stat - math.log(params.b)))
    if core / grid.dx < MIN_CORE_CELLS:
        raise ResolutionError(
            f"core width {core:.3g} spans {core / grid.dx:.3g} cells, need >= {MIN_CORE_CELLS}"
        )
    vals = closed_form_cell_averages(params, t0, x0, grid)
    state = GridDensity(grid, vals, params, float(t0), float(x0))
    total = mass(state)
    if not total > 0.0:
        raise ResolutionError("the initial profile has no mass on the grid")
    return replace(state, values=vals / total)


def _potential(params: ModelParams, v: np.ndarray, x: np.ndarray):
    """``xi`` and ``d xi / d v`` (zero where ``v = 0`` in the porous regime)."""
    m = params.m
    x2 = 0.5 * x * x
    if params.regime is Regime.POROUS_MEDIUM:
        pos = v > 0.0
        vp = np.where(pos, v, 1.0)
        xi = m / (m - 1.0) * np.where(pos, vp ** (m - 1.0), 0.0) + x2
        dxi = np.where(pos, m * vp ** (m - 2.0), 0.0)
        return xi, dxi
    if np.any(v <= 0.0):
        raise StabilityError("nonpositive density in a regime with full support")
    if params.regime is Regime.GAUSSIAN:
        return np.log(v) + x2, 1.0 / v
    return m / (m - 1.0) * v ** (m - 1.0) + x2, m * v ** (m - 2.0)


def _fluxes(state: GridDensity, v: np.ndarray):
    """Interior face fluxes ``F = v_up (xi_+ - xi_-)/dx`` with their pieces."""
    g = state.grid
    xi, dxi = _potential(state.params, v, g.centers)
    grad = (xi[1:] - xi[:-1]) / g.dx
    right = grad > 0.0
    up = np.where(right, v[1:], v[:-1])
    return up * grad, grad, right, up, dxi


def _divergence(state: GridDensity, interior_flux: np.ndarray) -> np.ndarray:
    g = state.grid
    A = g.areas(state.d)
    F = np.zeros(g.n_cells + 1)
    F[1:-1] = interior_flux * A[1:-1]
    return (F[1:] - F[:-1]) / g.volumes(state.d)


def _diffusivity(params: ModelParams, v: np.ndarray) -> float:
    """Largest ``m v^(m-1)`` over occupied cells."""
    pos = v[v > 0.0]
    if pos.size == 0:
        raise StabilityError("empty state")
    if params.regime is Regime.GAUSSIAN:
        return 1.0
    return float(np.max(params.m * pos ** (params.m - 1.0)))


def cfl_dt(state: GridDensity) -> float:
    """Explicit step bound ``0.4 dx^2 / max(2 D k, dx |x|_max)``.

    ``D`` is the largest ``m v^(m-1)`` over occupied cells, which for
    ``m < 1`` sits at the smallest density, not the largest. ``k`` is
    ``max(1, d/2)`` in the radial geometry, whose origin cell has outflow
    area over volume ``d/dx`` instead of ``2/dx``.
    """
    g = state.grid
    D = _diffusivity(state.params, state.values)
    k = 1.0 if g.geometry == "line" else max(1.0, 0.5 * state.d)
    xmax = float(np.max(np.abs(g.faces)))
    return CFL_SAFETY * g.dx * g.dx / max(2.0 * D * k, g.dx * xmax)


def _clip(state: GridDensity, v: np.ndarray, t: float) -> GridDensity:
    neg = v < 0.0
    lost = state.mass_lost
    if np.any(neg):
        g = state.grid
        lost += g.measure_weight(state.d) * float(np.sum(-v[neg] * g.volumes(state.d)[neg]))
        v = np.where(neg, 0.0, v)
        if lost > MAX_MASS_LOSS:
            raise StabilityError(f"cumulative clipped mass {lost:.3g} exceeds {MAX_MASS_LOSS}")
    return replace(state, values=v, time=t, mass_lost=lost)


def step(state: GridDensity, dt: float) -> GridDensity:
    """One forward Euler step.

    Raises
    ------
    StabilityError
        ``dt`` above :func:`cfl_dt`, or clipped mass above ``1e-6``.
    """
    if not dt > 0.0:
        raise DomainError("dt must be > 0")
    bound = cfl_dt(state)
    if dt > bound * (1.0 + 1e-12):
        raise StabilityError(f"dt = {dt:.3g} exceeds the CFL bound {bound:.3g}")
    flux = _fluxes(state, state.values)[0]
    v = state.values + dt * _divergence(state, flux)
    return _clip(state, v, state.time + dt)


def step_implicit(state: GridDensity, dt: float, tol: float = 1e-13, max_iter: int = 40) -> GridDensity:
    """One backward Euler step solved by Newton's method.

    Raises
    ------
    StabilityError
        Newton fails to converge or produces a nonpositive density.
    """
    if not dt > 0.0:
        raise DomainError("dt must be > 0")
    g = state.grid
    d = state.d
    A = g.areas(d)[1:-1]
    vol = g.volumes(d)
    n = g.n_cells
    vn = state.values
    u = vn.copy()
    for _ in range(max_iter):
        flux, grad, right, up, dxi = _fluxes(state, u)
        R = u - vn - dt * _divergence(state, flux)
        # dF/du_i (left cell) and dF/du_{i+1} (right cell), scaled by face area
        dl = (np.where(right, 0.0, grad) - up * dxi[:-1] / g.dx) * A
        dr = (np.where(right, grad, 0.0) + up * dxi[1:] / g.dx) * A
        main = np.ones(n)
        upper = np.zeros(n)
        lower = np.zeros(n)
        main[:-1] -= dt * dl / vol[:-1]
        main[1:] += dt * dr / vol[1:]
        upper[1:] = -dt * dr / vol[:-1]
        lower[:-1] = dt * dl / vol[1:]
        du = solve_banded((1, 1), np.vstack([upper, main, lower]), -R)
        u = u + du
        if state.params.regime is not Regime.POROUS_MEDIUM and np.any(u <= 0.0):
            raise StabilityError("Newton iterate left the positive cone")
        if np.max(np.abs(du)) < tol * np.max(np.abs(u)):
            return _clip(state, u, state.time + dt)
    raise StabilityError(f"Newton did not converge in {max_iter} iterations")


def discrete_entropy(state: GridDensity, reference: Optional[np.ndarray] = None) -> float:
    """Cell-sum relative entropy ``E(v) - E(v_inf)``.

    ``E(v) = sum vol (v^m/(m-1) + |x|^2 v/2)``, with ``v log v`` in place of
    ``v^m/(m-1)`` when ``m = 1``. Both states share the grid and total mass,
    so the linear term of the relative entropy cancels. ``reference``
    defaults to :func:`discrete_equilibrium`, so the result is ``>= 0``.
    """
    if reference is None:
        reference = _equilibrium(state)
    return _energy(state, state.values) - _energy(state, reference)


def discrete_equilibrium(params: ModelParams, grid: GridSpec, time: float = 0.0) -> GridDensity:
    """Unit-mass grid state with constant ``xi`` at the cell centers.

    This is the fixed point of the scheme and the minimizer of the discrete
    energy at unit mass. It is ``v_inf`` sampled at the centers with its
    constant re-solved on the grid; plain cell averages of ``v_inf`` differ
    from it by ``O(dx^2)`` and relax towards it. The state carries ``time``
    as given since it does not evolve.
    """
    _check_geometry(params, grid, 0.0)
    x = grid.centers
    w = grid.measure_weight(params.d) * grid.volumes(params.d)
    if params.regime is Regime.GAUSSIAN:
        v = np.exp(-0.5 * x * x)
        return GridDensity(grid, v / math.fsum(w * v), params, float(time))
    bx2 = params.b * x * x
    p = params.p
    fast = params.regime is Regime.FAST_DIFFUSION

    def profile(log_c):
        c = math.exp(log_c)
        return (c + bx2) ** -p if fast else np.maximum(c - bx2, 0.0) ** p

    def excess(log_c):
        return math.log(math.fsum(w * profile(log_c)))

    lo, hi = params.log_c_stat - 1.0, params.log_c_stat + 1.0
    while excess(lo) * excess(hi) > 0.0:
        lo, hi = lo - 2.0 * (hi - lo), hi + 2.0 * (hi - lo)
    v = profile(brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return GridDensity(grid, v / math.fsum(w * v), params, float(time))


def _equilibrium(state: GridDensity) -> np.ndarray:
    return discrete_equilibrium(state.params, state.grid).values


def _energy(state: GridDensity, v: np.ndarray) -> float:
    g = state.grid
    x2 = 0.5 * g.centers ** 2
    m = state.params.m
    if state.params.regime is Regime.GAUSSIAN:
        with np.errstate(divide="ignore", invalid="ignore"):
            e = np.where(v > 0.0, v * np.log(np.where(v > 0.0, v, 1.0)), 0.0)
    else:
        e = v ** m / (m - 1.0)
    return g.measure_weight(state.d) * math.fsum(g.volumes(state.d) * (e + x2 * v))


@dataclass
class Trajectory:
    """Per-step entropy and mass, plus snapshots at requested times."""

    times: List[float] = field(default_factory=list)
    entropies: List[float] = field(default_factory=list)
    masses: List[float] = field(default_factory=list)
    snapshots: List[GridDensity] = field(default_factory=list)

    @property
    def max_entropy_increase(self) -> float:
        if len(self.entropies) < 2:
            return 0.0
        return float(np.max(np.diff(self.entropies)))


def evolve(
    state: GridDensity,
    t_end: float,
    method: str = "explicit",
    dt: Optional[float] = None,
    snapshot_times: Sequence[float] = (),
    track_entropy: bool = True,
) -> tuple:
    """Advance ``state`` to ``t_end``; returns ``(final_state, Trajectory)``.

    Explicit steps use :func:`cfl_dt` re-evaluated every step, shortened to
    land on snapshot times and ``t_end``. Implicit steps default to a fixed
    ``dt = dx/4`` rounded so that an integer number of steps reaches
    ``t_end``.
    """
    if method not in ("explicit", "implicit"):
        raise DomainError(f"unknown method {method!r}")
    if not t_end >= state.time:
        raise DomainError("t_end must not precede the current time")
    if t_end > 5.0:
        raise DomainError("integration beyond t = 5 is not supported")
    marks = sorted(float(s) for s in snapshot_times if state.time <= s <= t_end)
    reference = _equilibrium(state) if track_entropy else None
    traj = Trajectory()

    def record(s: GridDensity):
        traj.times.append(s.time)
        traj.masses.append(mass(s))
        if track_entropy:
            traj.entropies.append(discrete_entropy(s, reference))

    record(state)
    while marks and marks[0] <= state.time:
        traj.snapshots.append(state)
        marks.pop(0)
    if method == "implicit":
        span = t_end - state.time
        base = state.grid.dx / 4.0 if dt is None else float(dt)
        nsteps = max(1, int(math.ceil(span / base - 1e-9))) if span > 0 else 0
        h = span / nsteps if nsteps else 0.0
        t_start = state.time
        for k in range(1, nsteps + 1):
            target = t_start + k * h
            state = step_implicit(state, target - state.time)
            state = replace(state, time=target)
            record(state)
            while marks and marks[0] <= state.time + 1e-12:
                traj.snapshots.append(replace(state, time=marks.pop(0)))
        return state, traj
    while state.time < t_end:
        stop = marks[0] if marks else t_end
        h = cfl_dt(state) if dt is None else min(float(dt), cfl_dt(state))
        landing = stop - state.time <= h
        state = step(state, min(h, stop - state.time))
        if landing:
            state = replace(state, time=stop)
        record(state)
        while marks and marks[0] <= state.time:
            traj.snapshots.append(replace(state, time=marks.pop(0)))
    return state, traj


def l1_error(state: GridDensity) -> float:
    """``L^1`` distance between the grid state and the closed form at the same time."""
    exact = closed_form_cell_averages(state.params, state.time, state.x0, state.grid)
    g = state.grid
    return g.measure_weight(state.d) * math.fsum(g.volumes(state.d) * np.abs(state.values - exact))


def numerical_front(state: GridDensity, threshold: float = 1e-10) -> float:
    """Outer face of the last cell holding more than ``threshold * max(v)``."""
    v = state.values
    occupied = np.nonzero(v > threshold * float(np.max(v)))[0]
    if occupied.size == 0:
        raise StabilityError("empty state")
    return float(state.grid.faces[occupied[-1] + 1])


def exact_front(state: GridDensity) -> float:
    """``a(t) R_inf``: radius of the closed-form support (``inf`` unless porous)."""
    return flow_state(state.params, state.time, abs(state.x0)).a * support_radius(state.params)


def write_trajectory_csv(snapshots: Sequence[GridDensity], out: TextIO) -> None:
    """CSV with columns ``time, cell_center, value`` at 17 significant digits."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["time", "cell_center", "value"])
    for s in snapshots:
        t = f"{s.time:.17g}"
        for x, v in zip(s.grid.centers, s.values):
            w.writerow([t, f"{x:.17g}", f"{v:.17g}"])
