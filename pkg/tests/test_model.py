import math

import numpy as np
import pytest

from stablehit.model import ParameterError, lk_exponent, make_model, model_from_theta, psi, psi_real_axis


def test_symmetric_model():
    m = make_model(1.5, 0.5)
    assert m.theta == 0.0
    assert m.sim_beta == 0.0
    assert m.sim_sigma == 1.0


def test_boundary_rho_is_one_sided():
    m = make_model(1.5, 1 / 3)
    assert m.theta == pytest.approx(math.pi / 6, abs=1e-12)
    assert abs(m.sim_beta) == pytest.approx(1.0, abs=1e-12)
    assert math.tan(1.5 * m.theta) == pytest.approx(-math.tan(1.5 * math.pi / 2), rel=1e-9)


@pytest.mark.parametrize("alpha, rho, fragment", [
    (1.5, 0.8, "rho <= 1/alpha"),
    (1.5, 0.2, "rho >= 1 - 1/alpha"),
    (2.5, 0.5, "1 < alpha < 2"),
    (1.0, 0.5, "1 < alpha < 2"),
])
def test_parameter_errors_name_the_bound(alpha, rho, fragment):
    with pytest.raises(ParameterError, match=fragment.replace("(", r"\(")):
        make_model(alpha, rho)


def test_psi_examples():
    assert psi(make_model(1.5, 0.5), 1.0) == pytest.approx(1.0, abs=1e-15)
    th = 0.2
    m = model_from_theta(1.5, th)
    v = psi(m, 2 * np.exp(1j * th))
    assert v.real == pytest.approx(2 ** 1.5, rel=1e-14)
    assert abs(v.imag) < 1e-14
    m = model_from_theta(1.3, -0.1)
    v = psi(m, -1.0)
    assert v == pytest.approx(np.exp(1j * 1.3 * -0.1), abs=1e-15)
    assert v == pytest.approx(np.conj(psi(m, 1.0)), abs=1e-15)


def test_psi_imaginary_axis_rejected():
    with pytest.raises(ValueError):
        psi(make_model(1.5, 0.5), 2j)


@pytest.mark.parametrize("alpha, rho", [(1.2, 0.45), (1.5, 0.55), (1.9, 0.5), (1.7, 1 - 1 / 1.7)])
def test_psi_invariants(alpha, rho):
    m = make_model(alpha, rho)
    r = np.geomspace(1e-3, 1e3, 25)
    assert np.max(np.abs(psi(m, r * np.exp(1j * m.theta)).imag)) <= 1e-12 * np.max(r ** alpha)
    assert np.max(np.abs(psi(m, -r * np.exp(-1j * m.theta)).imag)) <= 1e-12 * np.max(r ** alpha)
    x = np.concatenate([-r, r])
    assert np.allclose(psi(m, -x), np.conj(psi(m, x)), rtol=1e-14, atol=0)
    assert np.allclose(np.abs(psi(m, x)), np.abs(x) ** alpha, rtol=1e-13)
    assert np.allclose(psi_real_axis(m, x), psi(m, x), rtol=1e-13, atol=0)
    z = np.array([1 + 2j, -0.3 + 0.1j, 4 - 1j])
    for c in (0.1, 3.0):
        assert np.allclose(psi(m, c * z), c ** alpha * psi(m, z), rtol=1e-12, atol=0)
    assert m.sim_sigma ** alpha * math.sqrt(1 + math.tan(alpha * m.theta) ** 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("rho", [0.4, 0.5, 0.6])
def test_process_exponent_is_psi_at_minus_xi(rho):
    m = make_model(1.6, rho)
    xi = np.array([-3.0, -0.4, 0.2, 1.0, 7.0])
    assert np.allclose(lk_exponent(m, xi), psi(m, -xi), rtol=1e-14, atol=0)


def test_p_positive_and_mirror():
    m = make_model(1.5, 0.55)
    assert m.p_positive == pytest.approx(0.55, abs=1e-15)
    assert m.mirrored().theta == pytest.approx(-m.theta, abs=1e-15)
