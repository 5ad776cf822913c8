import math

import numpy as np
import pytest

from fdcutoff.barenblatt import density_at, lm_norm, moment, params_from_m
from fdcutoff.dynamics import (
    change_of_variables_residual,
    flow_state,
    fokker_planck_density,
    log_scale_factor_deficit,
    scale_factor,
    scale_factor_deficit,
    self_similar_density,
    solution_density,
    tau,
    tau_inverse,
)
from fdcutoff.errors import DomainError
from fdcutoff.oracles.quadrature import radial_quadrature


def test_scale_factor_examples():
    assert scale_factor(math.log(2.0), 1.0) == pytest.approx(0.5, rel=1e-15)
    for t in (0.1, 1.0, 3.0):
        assert scale_factor(t, 0.5) == pytest.approx(math.sqrt(1 - math.exp(-2 * t)), rel=1e-14)
    for alpha in (0.25, 1.0, 2.0):
        t = 100 * alpha
        first_order = 1.0 - alpha * math.exp(-t / alpha)
        assert abs(scale_factor(t, alpha) - first_order) <= 2 * alpha**2 * math.exp(-2 * t / alpha) + 1e-16


def test_scale_factor_monotone_and_limits():
    rng = np.random.default_rng(1)
    for _ in range(200):
        t1, t2 = np.sort(rng.uniform(1e-3, 20, 2))
        alpha = rng.uniform(0.05, 3)
        if t1 < t2:
            assert scale_factor(t1, alpha) <= scale_factor(t2, alpha)
    assert scale_factor(1e-12, 1.0) < 1e-11
    with pytest.raises(DomainError):
        scale_factor(0.0, 1.0)


def test_deficit_precision():
    # naive 1 - a loses all digits here
    alpha, t = 1.0, 50.0
    assert scale_factor_deficit(t, alpha) == pytest.approx(math.exp(-50.0), rel=1e-12)
    assert log_scale_factor_deficit(1e6, 0.01) == pytest.approx(math.log(0.01) - 1e8, rel=1e-15)
    assert math.exp(log_scale_factor_deficit(2.0, 0.7)) == pytest.approx(scale_factor_deficit(2.0, 0.7), rel=1e-14)


def test_flow_state():
    p = params_from_m(5, 0.9)
    s = flow_state(p, 50 * max(1.0, p.alpha), 0.0)
    assert abs(1.0 - s.a) <= 1e-20 or s.a == 1.0
    assert s.h_norm == 0.0
    s = flow_state(p, 1.7, 5.0)
    assert s.h_norm == pytest.approx(5 * math.exp(-1.7), rel=1e-14)
    g = flow_state(params_from_m(3, 1.0), 0.8, 2.0)
    assert g.a**2 == pytest.approx(1 - math.exp(-1.6), rel=1e-14)
    assert g.h_norm == pytest.approx(2 * math.exp(-0.8), rel=1e-14)
    with pytest.raises(DomainError):
        flow_state(p, 1.0, -1.0)


def test_solution_density_two_routes():
    for m, d in ((0.8, 3), (1.5, 4), (1.0, 2), (0.95, 10)):
        p = params_from_m(d, m)
        r = np.linspace(0, 4, 17)
        for t in (0.1, 1.0, 5.0):
            s = flow_state(p, t, 0.0)
            np.testing.assert_allclose(solution_density(s, r), fokker_planck_density(p, t, r), rtol=1e-12, atol=1e-300)


def test_solution_density_limits_and_support():
    p = params_from_m(3, 2.0)
    s = flow_state(p, 40.0, 0.0)
    r = np.linspace(0, 0.9, 7)
    np.testing.assert_allclose(solution_density(s, r), density_at(p, r), rtol=1e-12)
    s = flow_state(p, 0.3, 1.0)
    assert solution_density(s, s.support_radius() * 1.0001) == 0.0
    assert solution_density(s, s.support_radius() * 0.999) > 0.0


@pytest.mark.parametrize("m, d", [(0.8, 3), (1.5, 5), (1.0, 4), (0.95, 12)])
def test_pushforward_moments(m, d):
    p = params_from_m(d, m)
    t = 0.7
    s = flow_state(p, t, 0.0)
    upper = s.support_radius()
    kw = dict(upper=upper, singular_edge=math.isfinite(upper), tol=1e-11)
    mass = radial_quadrature(lambda r: solution_density(s, r), d, **kw).value
    assert mass == pytest.approx(1.0, rel=1e-8)
    m2 = radial_quadrature(lambda r: solution_density(s, r) * r * r, d, **kw).value
    assert m2 == pytest.approx(s.a**2 * moment(p, 2.0), rel=1e-8)
    if p.regime.value != "gaussian":
        nm = radial_quadrature(lambda r: solution_density(s, r) ** m, d, **kw).value
        kappa = (2 * p.alpha - 1) / p.alpha
        assert nm == pytest.approx(s.a**kappa * lm_norm(p), rel=1e-8)


def test_self_similar_density():
    p = params_from_m(3, 0.8)
    r = np.linspace(0, 3, 7)
    np.testing.assert_allclose(self_similar_density(p, 1.0, r), density_at(p, r, "unit"), rtol=1e-14)
    for t in (0.1, 1.0, 10.0):
        mass = radial_quadrature(lambda x: self_similar_density(p, t, x), 3, tol=1e-11).value
        assert mass == pytest.approx(1.0, rel=1e-8)
    g = params_from_m(2, 1.0)
    t = 0.6
    np.testing.assert_allclose(
        self_similar_density(g, t, r), (4 * math.pi * t) ** -1 * np.exp(-r * r / (4 * t)), rtol=1e-13
    )


def test_change_of_variables():
    for m, d in ((0.8, 3), (1.5, 4), (1.0, 2), (0.7, 1), (2.0, 6)):
        p = params_from_m(d, m)
        for t in (0.05, 0.5, 3.0):
            for radius in (0.0, 0.3, 1.2):
                for c in (-0.9, 0.3, 1.0):
                    assert change_of_variables_residual(p, t, radius, 1.5, c) <= 1e-10
    alpha = 0.7
    assert tau_inverse(1.0, alpha) == pytest.approx(alpha * (math.exp(1 / alpha) - 1), rel=1e-15)
    assert tau(tau_inverse(1.0, alpha), alpha) == pytest.approx(1.0, rel=1e-15)
