"""Acceptance criteria, each at its stated tolerance and time budget.

Run ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per criterion
is printed in the terminal summary.
"""

import filecmp
import math
import time

import mpmath
import numpy as np
import pytest

from fdcutoff import pde, verify
from fdcutoff.barenblatt import moment, moment_gap, params_from_alpha, params_from_m
from fdcutoff.cli import main
from fdcutoff.cutoff import (
    Metric,
    ScheduleSpec,
    Side,
    Verdict,
    fixed_m_log10_term_ratio,
    predicted_slope,
    scan,
    trend_fit,
)
from fdcutoff.divergences import entropy_flow, fisher_flow, w2_sq_flow
from fdcutoff.oracles.checks import entropy_production_check

METRICS = (Metric.W2_SQ, Metric.ENTROPY, Metric.FISHER)


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def _failed(checks):
    return [c.check_id for c in checks if not c.passed]


@pytest.mark.acceptance(1)
def test_moments_against_quadrature(criterion):
    with Timer() as tm:
        checks = verify.moment_checks()
    combos = {c.check_id.split("/", 2)[2] for c in checks if c.check_id.startswith("moments/M0/")}
    worst = max(c.measured for c in checks if c.check_id.split("/")[1] in ("M0", "M2", "M4", "Nm"))
    criterion(f"{len(combos)} combos, worst rel err {worst:.2e}, {tm.elapsed:.2f} s")
    assert len(combos) == 36
    assert not _failed(checks)
    assert tm.elapsed < 30.0


@pytest.mark.acceptance(2)
def test_second_moment_asymptotics(criterion):
    with Timer() as tm:
        for alpha in (0.25, 1.0, 2.0):
            errs = [
                abs(moment(params_from_alpha(d, alpha), 2.0) / (d * (2 * math.pi * math.e) ** (2 * alpha - 1)) - 1.0)
                for d in (10**2, 10**3, 10**4)
            ]
            criterion(f"alpha={alpha}: {errs[-1]:.1e} at 1e4")
            assert errs[-1] <= 0.02
            assert errs[0] > errs[1] > errs[2]
        d = 10**5
        err_m = abs(moment(params_from_m(d, 2.0), 2.0) * 2 * math.pi * math.e / d - 1.0)
        criterion(f"m=2: {err_m:.1e} at 1e5")
        assert err_m <= 0.02
    assert tm.elapsed < 1.0


def _mp_gap(d, m):
    """``M_2 - d N_m`` and ``M_2`` of ``v_inf`` from the Beta integrals at 60 digits.

    ``m`` is taken as the exact binary value the package holds.
    """
    with mpmath.workdps(60):
        d = mpmath.mpf(d)
        m = mpmath.mpf(m)
        b = abs(1 - m) / (2 * m)
        p = 1 / abs(1 - m)
        area = 2 * mpmath.pi ** (d / 2) / mpmath.gamma(d / 2)

        if m < 1:
            def integral(q, a):  # int (c + b r^2)^(-q) r^(d-1+a) dr, c = 1
                s = (d + a) / 2
                return area * b ** (-s) * mpmath.beta(s, q - s) / 2
            q_m = p - 1
        else:
            def integral(q, a):  # int (1 - b r^2)_+^q r^(d-1+a) dr
                s = (d + a) / 2
                return area * b ** (-s) * mpmath.beta(s, q + 1) / 2
            q_m = p + 1
        # v(r) = c^(sgn p) f(r / sqrt(c)) with f the c = 1 profile, so each
        # integral scales by a power of c
        sgn = -1 if m < 1 else 1
        I0, I2, Im = integral(p, 0), integral(p, 2), integral(q_m, 0)
        log_c = -mpmath.log(I0) / (sgn * p + d / 2)
        c = mpmath.e ** log_c
        M2 = c ** (sgn * p + d / 2 + 1) * I2
        Nm = c ** (sgn * p * m + d / 2) * Im
        return M2 - d * Nm, M2


@pytest.mark.acceptance(3)
def test_moment_gap_bounded(criterion):
    with Timer() as tm:
        for alpha in (0.25, 1.0):
            lo, hi = params_from_alpha(10**3, alpha), params_from_alpha(10**6, alpha)
            g_lo, g_hi = moment_gap(lo), moment_gap(hi)
            criterion(f"alpha={alpha}: {g_lo!r} at 1e3, {g_hi!r} at 1e6")
            assert abs(g_hi) <= 1.5 * abs(g_lo)
            # the gap vanishes identically; an independent 60-digit evaluation agrees
            for d, p in ((10**3, lo), (10**6, hi)):
                gap, M2 = _mp_gap(d, p.m)
                assert float(abs(gap) / M2) <= 1e-40
                assert float(M2) == pytest.approx(moment(p, 2.0), rel=1e-12)
            # plain double subtraction only sees rounding noise of the two terms
            noise = abs(moment_gap(hi, exact=False)) / moment(hi, 2.0)
            criterion(f"float noise {noise:.1e} relative")
            assert noise <= 1e-8
    assert tm.elapsed < 1.0


@pytest.mark.acceptance(4)
def test_transport_oracles(criterion):
    with Timer() as tm:
        checks = verify.transport_checks(seed=42)
    for c in checks:
        criterion(f"{c.check_id.split('/', 1)[1]}: {c.measured:.2e}")
    assert len(checks) == 5
    assert not _failed(checks)
    assert tm.elapsed < 120.0


@pytest.mark.acceptance(5)
def test_entropy_production(criterion):
    with Timer() as tm:
        gaps = []
        for alpha, d, t, x0 in verify.PRODUCTION_GRID:
            r = entropy_production_check(params_from_alpha(d, alpha), t, x0 * math.sqrt(d), step=1e-5)
            gaps.append(r.rel_gap)
    criterion(f"{len(gaps)} points, worst rel gap {max(gaps):.2e}, {tm.elapsed:.2f} s")
    assert len(gaps) == 36
    assert max(gaps) <= 1e-6
    assert tm.elapsed < 5.0


@pytest.mark.acceptance(6)
def test_entropy_fisher_quadrature(criterion):
    from fdcutoff.oracles.checks import entropy_quadrature, fisher_quadrature

    worst = 0.0
    porous = 0
    with Timer() as tm:
        for d, m, t, x0 in verify.OFFCENTER_CONFIGS:
            assert x0 != 0.0
            p = params_from_m(d, m)
            porous += m > 1
            worst = max(
                worst,
                abs(entropy_quadrature(p, t, x0) / entropy_flow(p, t, x0) - 1.0),
                abs(fisher_quadrature(p, t, x0) / fisher_flow(p, t, x0) - 1.0),
            )
    criterion(f"12 configs ({porous} porous), worst rel err {worst:.2e}, {tm.elapsed:.2f} s")
    assert len(verify.OFFCENTER_CONFIGS) == 12 and porous >= 3
    assert worst <= 1e-6
    assert tm.elapsed < 120.0


@pytest.mark.acceptance(7)
def test_cutoff_fixed_alpha(criterion):
    with Timer() as tm:
        for alpha in (0.25, 1.0, 2.0):
            spec = ScheduleSpec("fixed_alpha", alpha, eps=0.2, r=1.0)
            rows = scan(spec, sides=("below", "above"))
            slopes = []
            for side, sign in ((Side.BELOW, 1), (Side.ABOVE, -1)):
                target = predicted_slope(spec.with_side(side))
                for metric in METRICS:
                    sub = [r for r in rows if r.side is side and r.metric is metric]
                    assert np.all(sign * np.diff([r.sup_dist for r in sub]) > 0), (alpha, side, metric)
                    fit = trend_fit(sub)
                    slopes.append(fit.slope)
                    assert abs(fit.slope - target) <= 0.2 * abs(target), (alpha, side, metric, fit.slope)
            criterion(f"alpha={alpha}: slopes {min(slopes):+.3f}..{max(slopes):+.3f}")
    assert tm.elapsed < 5.0


@pytest.mark.acceptance(8)
def test_cutoff_fixed_m(criterion):
    with Timer() as tm:
        spec = ScheduleSpec("fixed_m", 2.0, eps=0.2)
        ratio = fixed_m_log10_term_ratio(10**5, spec)
        verdicts = []
        for side in ("below", "above"):
            rows = scan(spec.with_side(side))
            verdicts.append({trend_fit([r for r in rows if r.metric is m]).verdict for m in METRICS})
    criterion(f"log10 term ratio {ratio:.4g} at 1e5; verdicts {[sorted(v)[0].value for v in verdicts]}")
    assert ratio >= 3.0
    assert verdicts == [{Verdict.DIVERGES}, {Verdict.VANISHES}]
    assert tm.elapsed < 5.0


@pytest.mark.acceptance(9)
def test_regime_continuity(criterion):
    with Timer() as tm:
        p = params_from_m(10, 1.0 - 1e-6)
        g = params_from_m(10, 1.0)
        errs = [abs(fn(p, 1.0, 3.0) / fn(g, 1.0, 3.0) - 1.0) for fn in (w2_sq_flow, entropy_flow, fisher_flow)]
    criterion(f"rel errs {', '.join(f'{e:.1e}' for e in errs)}")
    assert max(errs) <= 1e-4
    assert tm.elapsed < 1.0


@pytest.mark.acceptance(10)
def test_pde_validation(criterion):
    with Timer() as tm:
        p = params_from_m(1, 0.7)
        errors = []
        for cells in (1024, 2048, 4096):
            state = pde.init_from_closed_form(p, 0.05, 2.0, pde.GridSpec("line", cells, 12.0))
            final, traj = pde.evolve(state, 2.0, method="implicit")
            errors.append(pde.l1_error(final))
        factors = [errors[i] / errors[i + 1] for i in range(2)]
        criterion(f"L1 {errors[-1]:.2e} at 4096 cells, refinement {factors[0]:.2f}/{factors[1]:.2f}")
        assert errors[-1] <= 1e-3
        assert min(factors) >= 1.7
        assert traj.max_entropy_increase <= 1e-8
        assert max(abs(np.asarray(traj.masses) - 1.0)) <= 1e-8

        p3 = params_from_m(3, 2.0)
        grid = pde.GridSpec("radial", 150, 1.5)
        state = pde.init_from_closed_form(p3, 0.05, 0.0, grid)
        _, traj = pde.evolve(state, 2.0, method="explicit", snapshot_times=(0.1, 0.25, 0.5, 1.0, 2.0))
        front = max(abs(pde.numerical_front(s) - pde.exact_front(s)) / grid.dx for s in traj.snapshots)
        criterion(f"radial front within {front:.2f} cells")
        assert len(traj.snapshots) == 5
        assert front <= 3.0
        assert traj.max_entropy_increase <= 1e-8
    criterion(f"{tm.elapsed:.0f} s")
    assert tm.elapsed < 300.0


@pytest.mark.acceptance(11)
def test_verify_all_deterministic(tmp_path, criterion):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    codes = [main(["verify", "all", "--seed", "42", "--out", str(path)]) for path in (a, b)]
    criterion(f"exit codes {codes}, {a.stat().st_size} bytes")
    assert codes == [0, 0]
    assert filecmp.cmp(a, b, shallow=False)
