import math

import numpy as np
import pytest

from fdcutoff.barenblatt import params_from_alpha
from fdcutoff.cutoff import (
    CutoffScanRow,
    Metric,
    Mode,
    ScheduleSpec,
    Side,
    Verdict,
    critical_time,
    fixed_m_log10_term_ratio,
    predicted_slope,
    scan,
    sup_distance,
    trend_fit,
)
from fdcutoff.divergences import w2_sq_flow
from fdcutoff.errors import DomainError, InsufficientData

METRICS = (Metric.W2_SQ, Metric.ENTROPY, Metric.FISHER)


def test_critical_time_examples():
    assert critical_time(100, ScheduleSpec("fixed_alpha", 2.0, eps=0.0)) == pytest.approx(math.log(100), rel=1e-15)
    for d in (10, 1000):
        assert critical_time(d, ScheduleSpec("fixed_alpha", 0.5, eps=0.0)) == pytest.approx(0.5 * math.log(d))
        assert critical_time(d, ScheduleSpec("fixed_m", 2.0, eps=0.0)) == pytest.approx(0.5 * math.log(d))
    # general theta: k = max(alpha/2, theta)
    assert critical_time(50, ScheduleSpec("fixed_alpha", 1.0, eps=0.0, theta=0.8)) == pytest.approx(0.8 * math.log(50))
    with pytest.raises(DomainError):
        critical_time(1, ScheduleSpec("fixed_alpha", 1.0))


def test_critical_time_midpoint():
    for eps in (0.1, 0.2, 0.5):
        below = ScheduleSpec("fixed_alpha", 1.5, eps=eps, side="below")
        above = below.with_side("above")
        mid = ScheduleSpec("fixed_alpha", 1.5, eps=0.0)
        assert 0.5 * (critical_time(1000, below) + critical_time(1000, above)) == pytest.approx(critical_time(1000, mid))


def test_spec_validation():
    with pytest.raises(DomainError):
        ScheduleSpec("fixed_m", 0.8)
    with pytest.raises(DomainError):
        ScheduleSpec("fixed_alpha", 1.0, eps=1.0)
    with pytest.raises(DomainError):
        ScheduleSpec("fixed_alpha", 1.0, theta=-0.1)
    with pytest.raises(ValueError):
        ScheduleSpec("nonsense", 1.0)


def test_sup_distance():
    p = params_from_alpha(100, 1.0)
    for metric in METRICS:
        assert sup_distance(p, 1.0, 0.0, 0.5, metric) == pytest.approx(
            sup_distance(p, 1.0, 0.0, 0.9, metric), rel=0
        )
        assert sup_distance(p, 1.0, 1.0, 0.5, metric) >= sup_distance(p, 1.0, 0.5, 0.5, metric)
    assert sup_distance(p, 1.0, 2.0, 0.5, "w2_sq") == pytest.approx(w2_sq_flow(p, 1.0, 20.0), rel=1e-15)


def test_dominant_terms_w2():
    d, alpha = 10**4, 1.0
    spec = ScheduleSpec("fixed_alpha", alpha, eps=0.2, side="below")
    t = critical_time(d, spec)
    exact = sup_distance(params_from_alpha(d, alpha), t, spec.r, spec.theta, "w2_sq")
    approx = spec.r**2 * d ** (2 * spec.theta) * math.exp(-2 * t) + alpha**2 * (
        2 * math.pi * math.e
    ) ** (2 * alpha - 1) * d * math.exp(-2 * t / alpha)
    assert exact == pytest.approx(approx, rel=0.1)


@pytest.mark.parametrize("alpha", [0.25, 1.0, 2.0])
def test_scan_two_sided_monotone(alpha):
    spec = ScheduleSpec("fixed_alpha", alpha, eps=0.2)
    rows = scan(spec, sides=("below", "above"))
    assert len(rows) == 5 * 2 * 3
    for side, sign in ((Side.BELOW, 1), (Side.ABOVE, -1)):
        for metric in METRICS:
            vals = [r.sup_dist for r in rows if r.side is side and r.metric is metric]
            assert np.all(sign * np.diff(vals) > 0)
    for d in (100, 10**6):
        for metric in METRICS:
            below = next(r for r in rows if r.d == d and r.metric is metric and r.side is Side.BELOW)
            above = next(r for r in rows if r.d == d and r.metric is metric and r.side is Side.ABOVE)
            assert below.sup_dist > above.sup_dist


def test_slope_alpha_one():
    spec = ScheduleSpec("fixed_alpha", 1.0, eps=0.2)
    for side, expect in (("below", 0.2), ("above", -0.2)):
        s = spec.with_side(side)
        assert predicted_slope(s) == pytest.approx(expect)
        fit = trend_fit(scan(s, metrics=["w2_sq"]))
        assert fit.slope == pytest.approx(expect, rel=0.2)
        assert fit.verdict is (Verdict.DIVERGES if side == "below" else Verdict.VANISHES)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_verdicts_invariant_in_r(r):
    for side in ("below", "above"):
        spec = ScheduleSpec("fixed_alpha", 1.0, eps=0.2, r=r, side=side)
        verdicts = {trend_fit(scan(spec, metrics=[m])).verdict for m in METRICS}
        assert verdicts == {Verdict.DIVERGES if side == "below" else Verdict.VANISHES}


def _row(d, v, metric=Metric.W2_SQ):
    return CutoffScanRow(d, Side.BELOW, 0.2, 1.0, metric, v, 1.0, Mode.FIXED_ALPHA, 1.0, 1.0, 0.5)


def test_trend_fit_edge_cases():
    fit = trend_fit([_row(d, 3.0) for d in (100, 1000, 10000)])
    assert fit.verdict is Verdict.INCONCLUSIVE and fit.slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InsufficientData):
        trend_fit([_row(100, 1.0), _row(1000, math.inf), _row(10000, 2.0)])
    with pytest.raises(DomainError):
        trend_fit([_row(100, 1.0), _row(1000, 1.0, Metric.FISHER), _row(10000, 1.0)])


def test_scan_validation_and_infinite_rows():
    spec = ScheduleSpec("fixed_alpha", 1.0)
    with pytest.raises(DomainError):
        scan(spec, dims=[])
    with pytest.raises(DomainError):
        scan(spec, dims=[1000, 100])
    with pytest.raises(DomainError):
        scan(spec, dims=[2, 100])
    # alpha = 4 has a second moment only once d > 14
    rows = scan(ScheduleSpec("fixed_alpha", 4.0), dims=[3, 10, 20, 30], metrics=["w2_sq"])
    assert [r.finite for r in rows] == [False, False, True, True]
    with pytest.raises(InsufficientData):
        trend_fit(rows[:3])


def test_fixed_m_campaign():
    spec = ScheduleSpec("fixed_m", 2.0, eps=0.2)
    assert fixed_m_log10_term_ratio(10**5, spec) >= 3.0
    below = trend_fit(scan(spec, metrics=["w2_sq"]))
    above = trend_fit(scan(spec.with_side("above"), metrics=["w2_sq"]))
    assert (below.verdict, above.verdict) == (Verdict.DIVERGES, Verdict.VANISHES)
    with pytest.raises(DomainError):
        fixed_m_log10_term_ratio(100, ScheduleSpec("fixed_alpha", 1.0))


def test_theta_half_reproduces_default():
    a = ScheduleSpec("fixed_alpha", 2.0, theta=0.5)
    b = ScheduleSpec("fixed_alpha", 2.0)
    assert scan(a) == scan(b)
