"""Free transition density, potential kernels and the Laplace transform of the
hitting time of the origin.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .model import StableModel
from .quadrature import (DEFAULT_POLICY, NonConvergenceError, QuadPolicy, integrate_adaptive,
                         integrate_semiinf, integrate_semiinf_damped)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResolventQuery:
    model: StableModel
    lam: float
    x: float
    y: float | None = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


def u_lambda_zero(model: StableModel, lam: float) -> float:
    """u_lambda(0) = cos(theta) / (alpha sin(pi/alpha)) * lambda^{1/alpha - 1}."""
    a = model.alpha
    return math.cos(model.theta) / (a * math.sin(math.pi / a)) * lam ** (1.0 / a - 1.0)


def u_lambda_zero_quadrature(model: StableModel, lam: float, policy: QuadPolicy | None = None) -> float:
    """u_lambda(0) = (1/pi) int_0^inf Re 1 / (lam + e^{i alpha theta} xi^alpha) d xi by quadrature."""
    a, th = model.alpha, model.theta
    rot = complex(math.cos(a * th), math.sin(a * th))

    def f(xi):
        return (1.0 / (lam + rot * xi ** a)).real

    scale = lam ** (1.0 / a)
    res = integrate_semiinf(f, 0.0, policy, decay=a, split=scale,
                            points=[0.25 * scale, 0.5 * scale], label="u_lambda(0)")
    return float(res.value) / math.pi


def _clip_density(value: float, what: str) -> float:
    if -1e-12 <= value < 0.0:
        log.info("%s: clipped small negative value %.3g to 0", what, value)
        return 0.0
    return value


_FAR = 20.0  # |x| t^{-1/alpha} beyond which p_t uses the tilted contour


def _p_tilted(model: StableModel, t: float, x: float, policy: QuadPolicy | None) -> float:
    """p_t(x) with the inversion contour turned onto a ray arg xi = +/- phi where
    e^{i xi x} decays and e^{-t psi} still does:

        p_t(x) = (1/pi) Re int_0^inf exp(i |x| r e^{i phi}) e^{i phi} exp(-t e^{i a (th + phi)} r^a) dr.
    """
    a = model.alpha
    th = -model.theta if x > 0 else model.theta
    phi = 0.5 * (math.pi / (2 * a) - th)
    eph = complex(math.cos(phi), math.sin(phi))
    rot = np.exp(1j * a * (th + phi))
    w = abs(x)

    def f(r):
        return (np.exp(1j * w * r * eph - t * rot * r ** a) * eph).real

    decay = w * math.sin(phi)
    hi = 60.0 / decay
    pts = list(np.geomspace(1e-3 * hi, hi, 13)[:-1])
    # the integrand's L1 norm is about 1/decay; ask for ~1e-13 relative to it
    tight = replace(policy or DEFAULT_POLICY, abs_tol=1e-13 / decay)
    return float(integrate_adaptive(f, 0.0, hi, tight, points=pts, label="p_t tilted inversion").value) / math.pi


def p_free(model: StableModel, t: float, x, policy: QuadPolicy | None = None):
    """p_t(x) = (1/2 pi) int e^{i xi x} e^{-t psi(xi)} d xi, reduced to the half line
    (vectorized in x)."""
    if not t > 0:
        raise ValueError("t must be positive")
    policy = policy or DEFAULT_POLICY
    a, th = model.alpha, -model.theta
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.empty(xs.shape)
    far = np.abs(xs) * t ** (-1.0 / a) > _FAR
    for i in np.nonzero(far)[0]:
        vals[i] = _p_tilted(model, t, float(xs[i]), policy)
    near = ~far
    if np.any(near):
        xn = xs[near]
        damp = t * math.cos(a * th)
        twist = t * math.sin(a * th)

        def f(xi):
            return np.cos(np.outer(xi, xn) - (twist * xi ** a)[:, None])

        scale = max(1.0, float(np.max(np.abs(xn))))
        period = 2 * math.pi / scale if scale > 1 else None
        res = integrate_semiinf_damped(f, damp, a, 0.0, policy, period=period, label="p_t inversion")
        vals[near] = np.asarray(res.value) / math.pi
    vals = np.array([_clip_density(v, "p_t") for v in vals])
    return vals[0] if np.ndim(x) == 0 else vals


def _u_fourier(model: StableModel, lam: float, y: float, epsabs: float = 1e-13) -> float:
    """(1/pi) Re int_0^inf e^{i xi y} / (lam + e^{-i alpha theta} xi^alpha) d xi via QAWF."""
    a, th = model.alpha, -model.theta
    c, s = math.cos(a * th), math.sin(a * th)

    def re_inv(xi):
        xa = xi ** a
        d_re, d_im = lam + c * xa, s * xa
        return d_re / (d_re * d_re + d_im * d_im)

    def im_inv(xi):
        xa = xi ** a
        d_re, d_im = lam + c * xa, s * xa
        return -d_im / (d_re * d_re + d_im * d_im)

    w = abs(y)
    sgn = 1.0 if y > 0 else -1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            cos_part = quad(re_inv, 0.0, np.inf, weight="cos", wvar=w, epsabs=epsabs, limlst=200)
            sin_part = quad(im_inv, 0.0, np.inf, weight="sin", wvar=w, epsabs=epsabs, limlst=200)
        except IntegrationWarning as exc:
            log.debug("QAWF flagged %s at y=%g; using the rotated contour", exc, y)
            return None
    return (cos_part[0] - sgn * sin_part[0]) / math.pi


def _u_rotated(model: StableModel, lam: float, y: float, policy: QuadPolicy | None = None) -> float:
    """Same kernel with the Fourier contour turned onto the rays arg xi = phi, pi - phi
    (upper half-plane for y > 0, mirrored for y < 0):

        u(y) = (1/pi) Re int_0^inf exp(i |y| r e^{i phi}) e^{i phi} / (lam + e^{i a (th + phi)} r^a) dr

    with th = -theta for y > 0 and th = theta for y < 0.

    Near the boundary angle the ray tilts (phi < pi/2) to stay clear of the pole.
    """
    a = model.alpha
    # values can be far below the default absolute floor; control the relative error
    policy = replace(policy or DEFAULT_POLICY, abs_tol=1e-16)
    th = -model.theta if y > 0 else model.theta
    # angular gap between the imaginary-axis contour and the pole; widen it to 0.3
    gap = math.pi - a * (math.pi / 2 + th)
    phi = math.pi / 2 - max(0.0, 0.3 - gap) / a
    eph = complex(math.cos(phi), math.sin(phi))
    rot = np.exp(1j * a * (th + phi))
    w = abs(y)

    def f(r):
        return (np.exp(1j * w * r * eph) * eph / (lam + rot * r ** a)).real

    scale = max(1.0, 1.0 / w, lam ** (1.0 / a))
    # geometric mesh so the e^{-|y| r} boundary layer is never hidden inside one panel
    lo = min(0.01 / w, 0.01 * scale)
    pts = list(np.geomspace(lo, scale, max(2, int(4 * math.log10(scale / lo))))[:-1])
    res = integrate_semiinf(f, 0.0, policy, decay=a, split=scale, points=pts,
                            label="rotated potential kernel")
    return float(res.value) / math.pi


def u_lambda(model: StableModel, lam: float, x, method: str = "fourier"):
    """Potential kernel u_lambda(x) (vectorized in x)."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for i, v in enumerate(xs):
        if v == 0.0:
            out[i] = u_lambda_zero(model, lam)
        elif method == "fourier":
            val = _u_fourier(model, lam, v)
            out[i] = _u_rotated(model, lam, v) if val is None else val
        elif method == "rotated":
            out[i] = _u_rotated(model, lam, v)
        else:
            raise ValueError(f"unknown method {method!r}")
    return out[0] if np.ndim(x) == 0 else out


def u0_kernel(model: StableModel, lam: float, x: float, y: float, method: str = "fourier") -> float:
    """Potential kernel of the process killed at the origin."""
    if x == 0 or y == 0:
        return 0.0
    u0 = u_lambda_zero(model, lam)
    vals = u_lambda(model, lam, np.array([y - x, -x, y]), method)
    return float(vals[0] - vals[1] * vals[2] / u0)


def hitting_laplace(model: StableModel, lam: float, x: float, method: str = "fourier") -> float:
    """E^x exp(-lambda tau_0) = u_lambda(-x) / u_lambda(0)."""
    if x == 0:
        raise ValueError("x must be non-zero")
    return float(u_lambda(model, lam, -x, method) / u_lambda_zero(model, lam))


def probability_positive(model: StableModel, t: float = 1.0) -> float:
    """P(X_t > 0) by Gil-Pelaez inversion of E e^{i xi X_t} = exp(-t psi(-xi))."""
    a, th = model.alpha, model.theta

    def f(xi):
        return -np.sin(t * math.sin(a * th) * xi ** a) / xi

    val = integrate_semiinf_damped(f, t * math.cos(a * th), a, label="positivity").value
    return 0.5 + float(val) / math.pi


__all__ = ["ResolventQuery", "p_free", "u_lambda", "u_lambda_zero", "u_lambda_zero_quadrature", "u0_kernel",
           "hitting_laplace", "probability_positive", "NonConvergenceError"]
