"""Oracle verification suites.

Each suite compares closed forms against an independent route and returns a
list of :class:`Check` records. Suites are deterministic for a given seed;
reports serialize to byte-stable JSON.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from . import pde
from .barenblatt import (
    lm_norm,
    moment,
    moment_gap,
    params_from_alpha,
    params_from_m,
)
from .divergences import entropy_flow, fisher_flow, w2_sq_flow
from .errors import ConstraintError, InfiniteMoment
from .oracles.checks import (
    entropy_production_check,
    entropy_quadrature,
    fisher_quadrature,
    lm_norm_quadrature,
    moment_quadrature,
)
from .oracles.sampling import sample_barenblatt, sample_flow
from .oracles.transport import barenblatt_law_1d, debiased_assignment_w2, flow_law_1d, ot_1d_quantile
from .serialize import dumps

__all__ = [
    "Check",
    "SUITES",
    "MOMENT_DIMS",
    "MOMENT_ALPHAS",
    "PRODUCTION_GRID",
    "OFFCENTER_CONFIGS",
    "TRANSPORT_1D_CONFIGS",
    "moment_checks",
    "transport_checks",
    "entropy_production_checks",
    "pde_checks",
    "run_suite",
    "report_json",
]

MOMENT_DIMS = (3, 6, 12)
# three fast-diffusion, the Gaussian, two porous-medium exponents
MOMENT_ALPHAS = (0.6, 0.75, 1.0, 0.5, 0.25, 0.4)
MOMENT_ORDERS = (0.0, 2.0, 4.0)
MOMENT_TOL = 1e-8

# (alpha, d, t, x0 in units of sqrt(d))
PRODUCTION_GRID = tuple(
    (alpha, d, t, x0)
    for alpha in (1.0, 0.25)
    for d in (3, 10, 50)
    for t in (0.5, 1.0, 2.0)
    for x0 in (0.0, 1.0)
)
PRODUCTION_TOL = 1e-6

# (d, m, t, |x0|): off-center states across all regimes
OFFCENTER_CONFIGS = (
    (3, 0.8, 1.0, 1.5),
    (5, 0.9, 0.7, 2.0),
    (10, 0.95, 1.0, 3.0),
    (1, 0.7, 0.8, 2.0),
    (2, 0.75, 1.2, 1.0),
    (4, 1.5, 1.0, 2.0),
    (6, 1.2, 1.3, 3.0),
    (3, 2.0, 0.6, 1.0),
    (1, 1.5, 0.5, 2.0),
    (8, 1.1, 1.5, 2.5),
    (3, 1.0, 1.0, 2.0),
    (12, 0.95, 2.0, 1.0),
)
OFFCENTER_TOL = 1e-6

# (m, t) at d = 1, |x0| = 2
TRANSPORT_1D_CONFIGS = ((0.7, 0.5), (0.7, 1.5), (1.5, 0.5), (1.5, 1.5))
TRANSPORT_1D_TOL = 1e-6


@dataclass(frozen=True)
class Check:
    """One comparison: ``passed`` iff ``measured <= tolerance``."""

    check_id: str
    anchor: str
    measured: float
    tolerance: float
    passed: bool
    detail: Optional[dict] = None

    def as_dict(self) -> dict:
        out = {
            "id": self.check_id,
            "anchor": self.anchor,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.detail:
            out["detail"] = dict(self.detail)
        return out


def _rel(a: float, b: float) -> float:
    if a == b:
        return 0.0
    return abs(a - b) / abs(b) if b != 0.0 else math.inf


def _check(check_id, anchor, measured, tol, **detail) -> Check:
    return Check(check_id, anchor, float(measured), float(tol), bool(measured <= tol), detail or None)


def moment_checks(seed: int = 0) -> List[Check]:
    """Closed-form ``M_0, M_2, M_4, N_m`` against radial quadrature.

    Orders without a finite closed form must raise instead of returning a
    number. The exact identity ``M_2 = d N_m`` for ``v_inf`` is checked too.
    """
    out = []
    for d in MOMENT_DIMS:
        for alpha in MOMENT_ALPHAS:
            p = params_from_alpha(d, alpha)
            for which in ("stationary", "unit"):
                tag = f"d={d},alpha={alpha},{which}"
                for a in MOMENT_ORDERS:
                    cid = f"moments/M{int(a)}/{tag}"
                    try:
                        cf = moment(p, a, which)
                    except InfiniteMoment:
                        out.append(_check(cid, "moment is infinite below the tail threshold", 0.0, 0.0, infinite=True))
                        continue
                    q = moment_quadrature(p, a, which)
                    out.append(_check(cid, "closed-form radial moment vs quadrature", _rel(q, cf), MOMENT_TOL))
                cid = f"moments/Nm/{tag}"
                try:
                    cf = lm_norm(p, which)
                except (ConstraintError, InfiniteMoment):
                    out.append(_check(cid, "L^m norm is infinite below the tail threshold", 0.0, 0.0, infinite=True))
                    continue
                q = lm_norm_quadrature(p, which)
                out.append(_check(cid, "closed-form L^m norm vs quadrature", _rel(q, cf), MOMENT_TOL))
            if p.has_second_moment and p.regime.value != "gaussian":
                gap = abs(moment_gap(p, exact=False)) / moment(p, 2.0)
                out.append(
                    _check(f"moments/M2-dNm/d={d},alpha={alpha}", "second moment equals d times the L^m norm", gap, 1e-12)
                )
    return out


def transport_checks(seed: int = 0, n_seeds: int = 20, n_points: int = 1024) -> List[Check]:
    """Closed-form ``W_2^2`` against 1-D quantile OT and debiased assignment OT."""
    out = []
    for m, t in TRANSPORT_1D_CONFIGS:
        p = params_from_m(1, m)
        exact = w2_sq_flow(p, t, 2.0)
        num = ot_1d_quantile(flow_law_1d(p, t, 2.0), barenblatt_law_1d(p), 100_000)
        out.append(
            _check(
                f"transport/1d/m={m},t={t}", "position-scale Wasserstein formula vs monotone coupling",
                _rel(num, exact), TRANSPORT_1D_TOL, exact=exact, numeric=num,
            )
        )
    p = params_from_m(3, 1.0)
    exact = w2_sq_flow(p, 1.0, 2.0)
    est = debiased_assignment_w2(
        lambda s, k: sample_flow(p, 1.0, 2.0, n_points, s, stream=k),
        lambda s, k: sample_barenblatt(p, n_points, None, s, stream=k),
        n_points,
        [seed + k for k in range(n_seeds)],
    )
    z = abs(est.mean - exact) / est.std_error
    out.append(
        _check(
            "transport/assignment/d=3,gaussian,t=1,x0=2",
            "Gaussian Wasserstein formula vs debiased assignment, in standard errors",
            z, 3.0, exact=exact, estimate=est.mean, std_error=est.std_error,
        )
    )
    return out


def entropy_production_checks(seed: int = 0) -> List[Check]:
    """``dH/dt = -I`` on the production grid; ``H`` and ``I`` against quadrature off center."""
    out = []
    for alpha, d, t, x0 in PRODUCTION_GRID:
        p = params_from_alpha(d, alpha)
        x0n = x0 * math.sqrt(d)
        r = entropy_production_check(p, t, x0n, step=1e-5)
        out.append(
            _check(
                f"entropy_production/alpha={alpha},d={d},t={t},x0={x0n:.6g}",
                "entropy derivative equals minus the Fisher information",
                r.rel_gap, PRODUCTION_TOL,
            )
        )
    for d, m, t, x0 in OFFCENTER_CONFIGS:
        p = params_from_m(d, m)
        tag = f"d={d},m={m},t={t},x0={x0}"
        H, Hq = entropy_flow(p, t, x0), entropy_quadrature(p, t, x0)
        I, Iq = fisher_flow(p, t, x0), fisher_quadrature(p, t, x0)
        out.append(_check(f"entropy/quadrature/{tag}", "closed-form relative entropy vs quadrature", _rel(Hq, H), OFFCENTER_TOL))
        out.append(_check(f"fisher/quadrature/{tag}", "closed-form Fisher information vs quadrature", _rel(Iq, I), OFFCENTER_TOL))
    return out


def pde_checks(seed: int = 0) -> List[Check]:
    """Finite-volume fixtures against the closed-form solution."""
    out = []
    p = params_from_m(1, 0.7)
    state = pde.init_from_closed_form(p, 0.05, 2.0, pde.GridSpec("line", 4096, 12.0))
    final, traj = pde.evolve(state, 2.0, method="implicit")
    out.append(_check("pde/line/l1", "finite-volume solution vs closed form at t = 2", pde.l1_error(final), 1e-3))
    out.append(
        _check("pde/line/entropy_monotone", "discrete entropy is non-increasing", max(traj.max_entropy_increase, 0.0), 1e-8)
    )
    out.append(
        _check(
            "pde/line/entropy_vs_closed_form", "discrete entropy vs closed-form entropy at t = 2",
            _rel(traj.entropies[-1], entropy_flow(p, 2.0, 2.0)), 0.02,
        )
    )
    out.append(_check("pde/line/mass", "mass conservation", abs(traj.masses[-1] - 1.0), 1e-8))

    p3 = params_from_m(3, 2.0)
    grid = pde.GridSpec("radial", 150, 1.5)
    state = pde.init_from_closed_form(p3, 0.05, 0.0, grid)
    times = (0.1, 0.25, 0.5, 1.0, 2.0)
    _, traj = pde.evolve(state, 2.0, method="implicit", snapshot_times=times)
    worst = max(abs(pde.numerical_front(s) - pde.exact_front(s)) / grid.dx for s in traj.snapshots)
    out.append(_check("pde/radial/front", "porous front radius vs closed-form support, in cells", worst, 3.0))
    out.append(
        _check("pde/radial/entropy_monotone", "discrete entropy is non-increasing", max(traj.max_entropy_increase, 0.0), 1e-8)
    )
    return out


SUITES: Dict[str, Callable[[int], List[Check]]] = {
    "moments": moment_checks,
    "transport": transport_checks,
    "entropy_production": entropy_production_checks,
    "pde": pde_checks,
}


def run_suite(name: str, seed: int = 0, threads: int = 1) -> List[Check]:
    """Run one suite, or all of them; output order is fixed by ``SUITES``."""
    if name != "all" and name not in SUITES:
        raise ValueError(f"unknown suite {name!r}")
    names = list(SUITES) if name == "all" else [name]
    if threads <= 1 or len(names) == 1:
        return [c for key in names for c in SUITES[key](seed)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda key: SUITES[key](seed), names))
    return [c for chunk in results for c in chunk]


def report_json(suite: str, seed: int, checks: List[Check]) -> str:
    doc = {
        "suite": suite,
        "seed": seed,
        "passed": all(c.passed for c in checks),
        "n_checks": len(checks),
        "n_failed": sum(not c.passed for c in checks),
        "checks": [c.as_dict() for c in checks],
    }
    return dumps(doc) + "\n"
