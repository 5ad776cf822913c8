import math

import numpy as np
import pytest

from fdcutoff.barenblatt import moment, params_from_alpha, params_from_m
from fdcutoff.divergences import (
    EllipticMoments,
    distance_report,
    entropy_bregman_form,
    entropy_flow,
    fisher_flow,
    jacobi_eigh,
    transport_map_matrix,
    w2_sq_elliptic,
    w2_sq_flow,
    w2_sq_position_scale,
    w2_sq_position_scale_cov,
)
from fdcutoff.dynamics import flow_state, solution_density
from fdcutoff.errors import DomainError, InfiniteMoment, PreconditionError, UnsupportedSize
from fdcutoff.oracles.checks import entropy_quadrature, fisher_quadrature
from fdcutoff.oracles.sampling import rng_stream
from fdcutoff.oracles.transport import ot_assignment


def _random_psd(rng, d):
    G = rng.standard_normal((d, d))
    return G @ G.T + 0.1 * np.eye(d)


def test_position_scale_examples():
    mu = EllipticMoments.isotropic(4)
    assert w2_sq_position_scale(mu, np.eye(4), np.zeros(4)) == 0.0
    h = np.array([1.0, -2.0, 0.5, 0.0])
    assert w2_sq_position_scale(mu, np.eye(4), h) == pytest.approx(h @ h, rel=1e-15)
    assert w2_sq_position_scale(mu, 2.5 * np.eye(4), np.zeros(4)) == pytest.approx(4 * 1.5**2, rel=1e-15)


def test_position_scale_forms_agree():
    rng = np.random.default_rng(3)
    for _ in range(20):
        mu = EllipticMoments(rng.standard_normal(3), _random_psd(rng, 3))
        A = _random_psd(rng, 3)
        h = rng.standard_normal(3)
        assert w2_sq_position_scale(mu, A, h) == pytest.approx(w2_sq_position_scale_cov(mu, A, h), rel=1e-10)


def test_position_scale_rejects_bad_A():
    mu = EllipticMoments.isotropic(2)
    with pytest.raises(DomainError):
        w2_sq_position_scale(mu, np.array([[1.0, 0.5], [0.0, 1.0]]), np.zeros(2))
    with pytest.raises(DomainError):
        w2_sq_position_scale(mu, np.diag([1.0, -1.0]), np.zeros(2))


def test_position_scale_vs_assignment():
    rng = rng_stream(11)
    A = _random_psd(rng, 3)
    h = rng.standard_normal(3)
    exact = w2_sq_position_scale(EllipticMoments.isotropic(3), A, h)
    vals = []
    for s in range(10):
        g = rng_stream(100 + s)
        x, x2, y = g.standard_normal((3, 1024, 3))
        y = y @ A + h
        yp = g.standard_normal((1024, 3)) @ A + h
        vals.append(ot_assignment(x, y) - 0.5 * (ot_assignment(x, x2) + ot_assignment(y, yp)))
    vals = np.asarray(vals)
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - exact) <= 3 * se


def test_elliptic_examples():
    rng = np.random.default_rng(5)
    S = _random_psd(rng, 3)
    m = rng.standard_normal(3)
    assert w2_sq_elliptic(EllipticMoments(m, S), EllipticMoments(m, S)) == pytest.approx(0.0, abs=1e-12)
    mu = EllipticMoments(np.zeros(2), np.diag([1.0, 4.0]))
    nu = EllipticMoments(np.zeros(2), np.diag([9.0, 16.0]))
    assert w2_sq_elliptic(mu, nu) == pytest.approx(8.0, rel=1e-15)


def test_elliptic_matches_transport_map():
    rng = np.random.default_rng(7)
    for _ in range(25):
        S1, S2 = _random_psd(rng, 3), _random_psd(rng, 3)
        m1, m2 = rng.standard_normal(3), rng.standard_normal(3)
        A = transport_map_matrix(S1, S2)
        np.testing.assert_allclose(A @ S1 @ A, S2, rtol=1e-9, atol=1e-10)
        mu, nu = EllipticMoments(m1, S1), EllipticMoments(m2, S2)
        via_map = w2_sq_position_scale(mu, A, m2 - A @ m1)
        assert w2_sq_elliptic(mu, nu) == pytest.approx(via_map, rel=1e-10)


def test_elliptic_size_limit_and_psd():
    rng = np.random.default_rng(9)
    S1, S2 = _random_psd(rng, 65), _random_psd(rng, 65)
    with pytest.raises(UnsupportedSize):
        w2_sq_elliptic(EllipticMoments(np.zeros(65), S1), EllipticMoments(np.zeros(65), S2))
    # commuting diagonal inputs stay on the cheap path at any size
    big = EllipticMoments.isotropic(500)
    assert w2_sq_elliptic(big, EllipticMoments.isotropic(500, 0.0, 4.0)) == pytest.approx(500.0)
    with pytest.raises(DomainError):
        w2_sq_elliptic(EllipticMoments.isotropic(2), EllipticMoments(np.zeros(2), np.diag([1.0, -1.0])))


def test_jacobi_eigh():
    rng = np.random.default_rng(2)
    S = _random_psd(rng, 6)
    w, V = jacobi_eigh(S)
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(S), rtol=1e-12)
    np.testing.assert_allclose(V @ np.diag(w) @ V.T, S, atol=1e-10)
    with pytest.raises(UnsupportedSize):
        jacobi_eigh(np.eye(65))


@pytest.mark.parametrize("d, t, x0", [(3, 0.5, 0.0), (10, 1.0, 3.0), (50, 2.0, 7.0)])
def test_gaussian_closed_forms(d, t, x0):
    p = params_from_m(d, 1.0)
    e2 = math.exp(-2 * t)
    assert w2_sq_flow(p, t, x0) == pytest.approx(d * (1 - math.sqrt(1 - e2)) ** 2 + x0**2 * e2, rel=1e-12)
    H = 0.5 * (d * (1 - e2) + x0**2 * e2 - d - d * math.log(1 - e2))
    assert entropy_flow(p, t, x0) == pytest.approx(H, rel=1e-12)
    I = x0**2 * e2 + d * math.exp(-4 * t) / (1 - e2)
    assert fisher_flow(p, t, x0) == pytest.approx(I, rel=1e-12)


def test_flow_metrics_limits_and_x0_zero():
    p = params_from_m(5, 0.9)
    for fn in (w2_sq_flow, entropy_flow, fisher_flow):
        assert fn(p, 60.0, 1.0) <= 1e-40
    s = flow_state(p, 0.7, 0.0)
    expect = s.a**2 * (1 - s.a ** (-1 / p.alpha)) ** 2 * moment(p, 2.0)
    assert fisher_flow(p, 0.7, 0.0) == pytest.approx(expect, rel=1e-12)
    with pytest.raises(InfiniteMoment):
        params = params_from_m(3, 0.55)
        entropy_flow(params, 1.0, 0.0)
    assert w2_sq_flow(params_from_m(3, 0.55), 1.0, 0.0) == math.inf


def test_monotone_in_x0():
    for m, d in ((0.9, 5), (1.0, 4), (1.5, 3), (0.6, 1)):
        p = params_from_m(d, m)
        for fn in (w2_sq_flow, entropy_flow, fisher_flow):
            vals = [fn(p, 0.8, x) for x in np.linspace(0, 10, 21)]
            assert np.all(np.diff(vals) >= 0)


def test_regime_continuity():
    d, t, x0 = 10, 1.0, 3.0
    g = params_from_m(d, 1.0)
    for m in (1 - 1e-6, 1 + 1e-6):
        p = params_from_m(d, m)
        for fn in (w2_sq_flow, entropy_flow, fisher_flow):
            assert fn(p, t, x0) == pytest.approx(fn(g, t, x0), rel=1e-4)


def test_entropy_near_gaussian_series():
    # |2 alpha - 1| tiny but not exactly zero: no catastrophic division
    g = params_from_m(6, 1.0)
    for m in (1 - 1e-10, 1 + 1e-10):
        assert entropy_flow(params_from_m(6, m), 0.5, 1.0) == pytest.approx(entropy_flow(g, 0.5, 1.0), rel=1e-7)


def test_entropy_quadrature_example():
    p = params_from_m(6, 1.2)
    assert entropy_flow(p, 1.3, 3.0) == pytest.approx(entropy_quadrature(p, 1.3, 3.0), rel=1e-7)


@pytest.mark.parametrize("d, m, t, x0", [(4, 1.5, 1.0, 2.0), (3, 0.8, 0.6, 0.0), (2, 1.3, 0.9, 1.0)])
def test_quadrature_routes(d, m, t, x0):
    p = params_from_m(d, m)
    assert entropy_quadrature(p, t, x0) == pytest.approx(entropy_flow(p, t, x0), rel=1e-6)
    assert fisher_quadrature(p, t, x0) == pytest.approx(fisher_flow(p, t, x0), rel=1e-6)


def test_bregman_form():
    p = params_from_m(5, 0.9)
    from fdcutoff.barenblatt import density_at

    assert abs(entropy_bregman_form(p, lambda r: density_at(p, r))) <= 1e-10
    t, x0 = 0.8, 1.5
    s = flow_state(p, t, x0)
    val = entropy_bregman_form(p, lambda r: solution_density(s, r), center_norm=s.h_norm)
    assert val == pytest.approx(entropy_flow(p, t, x0), rel=1e-6)


def test_bregman_support_violation():
    p = params_from_m(3, 2.0)
    s = flow_state(p, 0.5, 0.0)
    R = s.support_radius()
    with pytest.raises(PreconditionError):
        entropy_bregman_form(p, lambda r: solution_density(s, r), center_norm=1.0, density_support=R)


def test_distance_report():
    rep = distance_report(params_from_alpha(10, 1.0), 1.0, 2.0)
    d = rep.as_dict()
    assert d["source"] == "closed_form"
    assert d["w2_sq"] > 0 and d["entropy"] > 0 and d["fisher"] > 0
    rep = distance_report(params_from_m(3, 0.55), 1.0, 2.0)
    assert rep.entropy is None and rep.w2_sq == math.inf
