import math
import warnings

import numpy as np
import pytest
from scipy.integrate import IntegrationWarning, quad
from scipy.special import gamma

from stablehit.quadrature import (DivergenceError, IntegrandNaNError, NonConvergenceError, QuadPolicy,
                                  gauss_legendre_panels, integrate_adaptive, integrate_pv_power,
                                  integrate_semiinf, integrate_semiinf_damped)


def test_linear():
    r = integrate_adaptive(lambda x: x, 0.0, 1.0)
    assert r.value == pytest.approx(0.5, abs=1e-15)
    assert r.abs_err_estimate >= 0 and r.n_evals >= 1


def test_nan_integrand():
    with pytest.raises(IntegrandNaNError):
        integrate_adaptive(lambda x: np.full_like(x, np.nan), 0.0, 1.0)


def test_budget_exhaustion():
    with pytest.raises(NonConvergenceError):
        integrate_adaptive(lambda x: np.sin(1.0 / x) / x, 1e-9, 1.0, QuadPolicy(max_evals=150))


def _trapezoid_power_integral(alpha, n=200_001):
    # t = e^u, trapezoid in u; the integrand decays exponentially at both ends
    u = np.linspace(-60.0, 60.0, n)
    vals = np.exp(u) / (np.exp(alpha * u) + 1.0)
    return 120.0 / (n - 1) * (math.fsum(vals) - 0.5 * (vals[0] + vals[-1]))


def test_algebraic_tail():
    a = 1.5
    closed = math.pi / (a * math.sin(math.pi / a))
    assert closed == pytest.approx(2.4183991523, abs=1e-10)
    assert _trapezoid_power_integral(a) == pytest.approx(closed, rel=1e-9)
    r = integrate_semiinf(lambda t: 1.0 / (t ** a + 1.0), 0.0, decay=a)
    assert r.value == pytest.approx(closed, rel=1e-10)
    assert abs(r.value - closed) <= r.abs_err_estimate + 1e-12


def test_non_integrable_tail():
    with pytest.raises(DivergenceError):
        integrate_semiinf(lambda t: 1.0 / (t + 1.0), 0.0, decay=1.0)


def test_complex_and_vector_values():
    r = integrate_adaptive(lambda x: np.exp(1j * x), 0.0, math.pi)
    assert r.value == pytest.approx(2j, abs=1e-14)
    r = integrate_adaptive(lambda x: np.stack([x, x ** 2], axis=-1), 0.0, 1.0)
    assert np.allclose(r.value, [0.5, 1 / 3], atol=1e-15)


def test_linearity():
    f = lambda x: np.exp(-x) * np.cos(3 * x)  # noqa: E731
    g = lambda x: 1.0 / (1.0 + x * x)  # noqa: E731
    a, b = 2.5, -1.25
    lhs = integrate_adaptive(lambda x: a * f(x) + b * g(x), 0.0, 4.0)
    rf, rg = integrate_adaptive(f, 0.0, 4.0), integrate_adaptive(g, 0.0, 4.0)
    bound = lhs.abs_err_estimate + abs(a) * rf.abs_err_estimate + abs(b) * rg.abs_err_estimate
    assert abs(lhs.value - (a * rf.value + b * rg.value)) <= bound + 1e-15


def test_damped_examples():
    r = integrate_semiinf_damped(lambda s: np.ones_like(s), 1.0, 1.5)
    assert r.value == pytest.approx(gamma(5 / 3), rel=1e-12)
    assert r.value == pytest.approx(0.9027452930, abs=1e-10)
    r = integrate_semiinf_damped(lambda s: s, 1.0, 2.0)
    assert r.value == pytest.approx(0.5, rel=1e-12)
    r = integrate_semiinf_damped(lambda s: np.ones_like(s), 8.0, 1.5)
    assert r.value == pytest.approx(gamma(5 / 3) * 8.0 ** (-1 / 1.5), rel=1e-12)


def test_damped_with_growth():
    # int e^{-s^2} e^{s} ds = sqrt(pi) e^{1/4} (1 + erf(1/2)) / 2
    from scipy.special import erf
    r = integrate_semiinf_damped(lambda s: np.exp(s), 1.0, 2.0, growth_rate=1.0)
    assert r.value == pytest.approx(math.sqrt(math.pi) * math.exp(0.25) * (1 + erf(0.5)) / 2, rel=1e-11)


def test_damped_overflow_refused():
    with pytest.raises(NonConvergenceError):
        integrate_semiinf_damped(lambda s: np.exp(s), 1e-12, 1.5, growth_rate=1e3)


def _cauchy_oracle(h, s, alpha):
    """pv int_0^inf h(r) / (r^a - s^a) dr: scipy's Cauchy weight on [s/2, 2s], plain quad elsewhere."""
    def smooth(r):
        if abs(r - s) < 1e-12 * s:
            return h(s) / (alpha * s ** (alpha - 1))
        return h(r) * (r - s) / (r ** alpha - s ** alpha)

    def plain(r):
        return h(r) / (r ** alpha - s ** alpha)

    kw = dict(epsabs=1e-15, epsrel=1e-13, limit=400)
    with warnings.catch_warnings():
        # QAWC reports roundoff at this tolerance; the comparison is at 1e-8
        warnings.simplefilter("ignore", IntegrationWarning)
        body = quad(smooth, 0.5 * s, 2 * s, weight="cauchy", wvar=s, **kw)[0]
    head = quad(plain, 0.0, 0.5 * s, **kw)[0]
    tail = quad(plain, 2 * s, 2 * s + 10, **kw)[0] + quad(plain, 2 * s + 10, np.inf, **kw)[0]
    return head + body + tail


def test_pv_constant_numerator():
    r = integrate_pv_power(lambda r: np.ones_like(r), 1.0, 1.5)
    assert r.value == pytest.approx(1.2091995766, abs=1e-9)
    assert r.value == pytest.approx(_cauchy_oracle(lambda r: 1.0, 1.0, 1.5), abs=1e-8)


@pytest.mark.parametrize("alpha, s", [(1.3, 0.7), (1.5, 3.0), (1.8, 0.05)])
def test_pv_against_cauchy_weight(alpha, s):
    h = lambda r: 1.0 / (1.0 + r * r)  # noqa: E731
    r = integrate_pv_power(h, s, alpha)
    assert r.value == pytest.approx(_cauchy_oracle(h, s, alpha), abs=1e-8)


def test_pv_excision_levels_agree():
    h = lambda r: np.exp(-r) * np.cos(r)  # noqa: E731
    a = integrate_pv_power(h, 1.3, 1.6, QuadPolicy(pv_excision=0.25)).value
    b = integrate_pv_power(h, 1.3, 1.6, QuadPolicy(pv_excision=0.125)).value
    assert a == pytest.approx(b, abs=1e-10)


def test_pv_divergent_numerator():
    with pytest.raises(DivergenceError):
        integrate_pv_power(lambda r: r ** 1.5 - 1.0, 1.0, 1.5)


def test_pv_rejects_bad_location():
    with pytest.raises(ValueError):
        integrate_pv_power(lambda r: np.ones_like(r), 0.0, 1.5)


def test_policy_validation():
    with pytest.raises(ValueError):
        QuadPolicy(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadPolicy(pv_excision=0.5)
    with pytest.raises(ValueError):
        QuadPolicy(tail_policy="other")


def test_gauss_legendre_panels():
    x, w = gauss_legendre_panels(np.array([0.0, 0.5, 2.0]), 8)
    assert np.sum(w) == pytest.approx(2.0, abs=1e-15)
    assert np.sum(w * x ** 7) == pytest.approx(2.0 ** 8 / 8, rel=1e-14)
