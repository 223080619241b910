import math

import numpy as np
import pytest
from scipy.integrate import quad

from stablehit.model import make_model, model_from_theta
from stablehit.resolvent import (hitting_laplace, p_free, probability_positive, u0_kernel, u_lambda,
                                 u_lambda_zero, u_lambda_zero_quadrature)

MODEL = make_model(1.5, 0.55)


def _p(m, t, x):
    return float(p_free(m, t, np.array([x]))[0])


def _u(m, lam, x, method="fourier"):
    return float(u_lambda(m, lam, np.array([x]), method=method)[0])


def test_free_density_is_a_probability():
    total = quad(lambda z: _p(MODEL, 1.0, z), -np.inf, np.inf, limit=200)[0]
    right = quad(lambda z: _p(MODEL, 1.0, z), 0.0, np.inf, limit=200)[0]
    assert total == pytest.approx(1.0, abs=1e-9)
    assert right == pytest.approx(MODEL.p_positive, abs=1e-9)
    assert probability_positive(MODEL) == pytest.approx(0.55, abs=1e-10)


@pytest.mark.parametrize("t, x", [(8.0, 2.0), (0.3, -0.4)])
def test_free_density_scaling(t, x):
    c = t ** (-1 / MODEL.alpha)
    assert _p(MODEL, t, x) == pytest.approx(c * _p(MODEL, 1.0, c * x), rel=1e-9)


def test_chapman_kolmogorov():
    lhs = _p(MODEL, 2.0, 0.8)
    rhs = quad(lambda z: _p(MODEL, 1.0, z) * _p(MODEL, 1.0, 0.8 - z), -np.inf, np.inf, limit=400)[0]
    assert rhs == pytest.approx(lhs, abs=1e-6)


def test_resolvent_at_origin():
    m = model_from_theta(1.5, 0.0)
    assert u_lambda_zero(m, 1.0) == pytest.approx(0.7698003589, abs=1e-10)
    for lam in (0.1, 1.0, 10.0):
        assert u_lambda_zero_quadrature(MODEL, lam) == pytest.approx(u_lambda_zero(MODEL, lam), rel=1e-10)
        scaled = lam ** (1 / MODEL.alpha - 1) * u_lambda_zero(MODEL, 1.0)
        assert u_lambda_zero(MODEL, lam) == pytest.approx(scaled, rel=1e-8)


def test_resolvent_maximum_mass_and_methods():
    x = np.array([-5.0, -2.0, -0.5, -0.01, 0.01, 0.5, 2.0, 5.0])
    u = u_lambda(MODEL, 1.0, x)
    assert np.all(u > 0) and np.all(u <= u_lambda_zero(MODEL, 1.0))
    assert np.allclose(u_lambda(MODEL, 1.0, x, method="rotated"), u, rtol=1e-8, atol=1e-12)
    mass = quad(lambda z: _u(MODEL, 1.0, z), -np.inf, np.inf, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_killed_kernel():
    assert u0_kernel(MODEL, 1.0, 0.0, 1.0) == 0.0
    assert u0_kernel(MODEL, 1.0, 1.0, 0.0) == 0.0
    for x, y in [(0.7, -1.3), (1.0, 0.5), (-2.0, -0.4)]:
        k = u0_kernel(MODEL, 1.0, x, y)
        assert 0.0 <= k <= _u(MODEL, 1.0, y - x)
        # duality: the killed kernel of the reflected process with arguments swapped
        assert k == pytest.approx(u0_kernel(MODEL, 1.0, -y, -x), rel=1e-10)
        # first-passage decomposition at the origin
        decomposed = _u(MODEL, 1.0, y - x) - hitting_laplace(MODEL, 1.0, x) * _u(MODEL, 1.0, y)
        assert k == pytest.approx(decomposed, rel=1e-10, abs=1e-14)


def test_killed_kernel_symmetric_case():
    m = model_from_theta(1.5, 0.0)
    assert u0_kernel(m, 1.0, 0.7, -1.3) == pytest.approx(u0_kernel(m, 1.0, -1.3, 0.7), rel=1e-10)


def test_hitting_laplace_range_and_monotonicity():
    vals = [hitting_laplace(MODEL, 1.0, x) for x in (1e-6, 1.0, 10.0, 100.0)]
    assert all(0.0 < v < 1.0 for v in vals)
    assert vals[0] == pytest.approx(1.0, abs=2e-3)
    assert vals[0] > vals[1] > vals[2] > vals[3]
    assert hitting_laplace(MODEL, 1.0, -3.0) == pytest.approx(
        _u(MODEL, 1.0, 3.0) / u_lambda_zero(MODEL, 1.0), rel=1e-10)


def test_hitting_laplace_scaling():
    a = MODEL.alpha
    for c in (0.3, 4.0):
        assert hitting_laplace(MODEL, 1.0, c * 1.5) == pytest.approx(
            hitting_laplace(MODEL, c ** a, 1.5), rel=1e-9)
