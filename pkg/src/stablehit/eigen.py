"""Generalized eigenfunctions F+/-, their completely monotone parts G+/-, and the
closed-form Fourier transform of G+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .model import StableModel, psi_real_axis
from .quadrature import DEFAULT_POLICY, QuadPolicy, gauss_legendre_panels, integrate_adaptive

PLUS = "plus"
MINUS = "minus"

_T_CUT = 1e6          # explicit quadrature range of the kernel integral is tau <= _T_CUT
_PANEL = 0.25         # panel width in log(tau)
_NODES = 20
_TAIL_TERMS = 4


class BoundaryValueError(ValueError):
    """G is not defined at 0; use the one-sided limits from g_jump."""


def _chebyshev_u(n: int, x: float) -> np.ndarray:
    u = np.empty(n)
    u[0] = 1.0
    if n > 1:
        u[1] = 2.0 * x
    for k in range(2, n):
        u[k] = 2.0 * x * u[k - 1] - u[k - 2]
    return u


def _expint_general(p: float, z: np.ndarray) -> np.ndarray:
    """E_p(z) = int_1^inf e^{-z t} t^{-p} dt for real p > 1 and z > 0."""
    m = math.floor(p)
    q = p - m                      # in [0, 1)
    if q == 0.0:
        e = special.exp1(z)        # E_1
        start = 1.0
        steps = m - 1
    else:
        # E_q(z) = z^{q-1} Gamma(1-q, z)
        e = z ** (q - 1.0) * special.gammaincc(1.0 - q, z) * special.gamma(1.0 - q)
        start = q
        steps = m
    ez = np.exp(-z)
    for j in range(steps):
        order = start + j
        e = (ez - z * e) / order
    return e


@dataclass(frozen=True)
class KernelIntegral:
    """y -> (alpha sin(pi/alpha)/pi) int_0^inf mu(t) e^{-t y} dt with
    mu(t) = t^alpha sin a / (t^{2 alpha} - 2 t^alpha cos a + 1)."""

    alpha: float
    angle: float

    @property
    def prefactor(self) -> float:
        return self.alpha * math.sin(math.pi / self.alpha) / math.pi

    @property
    def vanishes(self) -> bool:
        return abs(math.sin(self.angle)) < 1e-15

    @property
    def at_zero(self) -> float:
        """Limit as y -> 0+, in closed form."""
        if self.vanishes:
            return 0.0
        return math.sin((math.pi - self.angle) / self.alpha)

    def density(self, t):
        a, al = self.angle, self.alpha
        ta = np.asarray(t, float) ** al
        return ta * math.sin(a) / (ta * ta - 2.0 * ta * math.cos(a) + 1.0)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        flat = y.ravel()
        if np.any(flat <= 0):
            raise ValueError("kernel integral needs y > 0")
        if self.vanishes:
            return np.zeros(y.shape)
        out = np.empty(flat.shape)
        order = np.argsort(flat)
        # chunk so the node-by-point matrix stays small
        for chunk in np.array_split(order, max(1, len(order) // 256)):
            out[chunk] = self._eval(flat[chunk])
        return out.reshape(y.shape)

    def _eval(self, y: np.ndarray) -> np.ndarray:
        lo = math.log(1e-9 * min(1.0, 1.0 / y.max()))
        hi = math.log(min(_T_CUT, 60.0 / y.min()))
        n = max(2, int(math.ceil((hi - lo) / _PANEL)))
        u, w = gauss_legendre_panels(np.linspace(lo, hi, n + 1), _NODES)
        t = np.exp(u)
        weight = w * t * self.density(t)
        body = np.exp(-np.outer(y, t)) @ weight
        need_tail = 60.0 / y > _T_CUT
        if np.any(need_tail):
            body[need_tail] += self._tail(y[need_tail])
        return self.prefactor * body

    def _tail(self, y: np.ndarray) -> np.ndarray:
        # mu(t) = sin a sum_k U_k(cos a) t^{-alpha (k+1)} for t > 1
        coef = math.sin(self.angle) * _chebyshev_u(_TAIL_TERMS, math.cos(self.angle))
        z = _T_CUT * y
        total = np.zeros_like(y)
        for k in range(_TAIL_TERMS):
            p = self.alpha * (k + 1)
            total += coef[k] * _T_CUT ** (1.0 - p) * _expint_general(p, z)
        return total

    def large_y_series(self, y, n_terms: int = 4):
        """Watson expansion for y -> inf."""
        y = np.asarray(y, float)
        coef = math.sin(self.angle) * _chebyshev_u(n_terms, math.cos(self.angle))
        out = np.zeros_like(y)
        for k in range(n_terms):
            p = self.alpha * (k + 1)
            out += coef[k] * math.gamma(p + 1.0) * y ** (-p - 1.0)
        return self.prefactor * out


@dataclass(frozen=True)
class EigenEvaluator:
    model: StableModel
    side: str = PLUS
    quad_policy: QuadPolicy = field(default=DEFAULT_POLICY)

    def __post_init__(self):
        if self.side not in (PLUS, MINUS):
            raise ValueError("side must be 'plus' or 'minus'")

    @property
    def theta(self) -> float:
        """Asymmetry angle seen by this side (minus = plus with theta negated)."""
        return self.model.theta if self.side == PLUS else -self.model.theta

    def kernel(self, positive: bool) -> KernelIntegral:
        a = self.model.alpha
        th = self.theta
        angle = a * (math.pi / 2 - th) if positive else a * (math.pi / 2 + th)
        return KernelIntegral(a, angle)


def g_eigen(e: EigenEvaluator, x):
    """G(x) for x != 0 (vectorized)."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise BoundaryValueError("G is undefined at x = 0; use g_jump for the one-sided limits")
    out = np.empty(x.shape)
    pos = x > 0
    if np.any(pos):
        out[pos] = e.kernel(True)(x[pos])
    if np.any(~pos):
        out[~pos] = e.kernel(False)(-x[~pos])
    return out[()] if out.ndim == 0 else out


def g_jump(e: EigenEvaluator) -> dict:
    right = e.kernel(True).at_zero
    left = e.kernel(False).at_zero
    return {"right_limit": right, "left_limit": left, "jump": right - left}


def g_jump_closed_form(e: EigenEvaluator) -> float:
    return 2.0 * math.sin(math.pi / e.model.alpha) * math.sin(e.theta)


def f_eigen(e: EigenEvaluator, x):
    """F(x) = e^{-x sin th} sin(|x| cos th + th sign x + pi/alpha - pi/2) - G(x); F(0) = 0."""
    x = np.asarray(x, dtype=float)
    th = e.theta
    a = e.model.alpha
    out = np.zeros(x.shape)
    nz = x != 0
    xs = x[nz]
    osc = np.exp(-xs * math.sin(th)) * np.sin(np.abs(xs) * math.cos(th) + th * np.sign(xs)
                                               + math.pi / a - math.pi / 2)
    out[nz] = osc - g_eigen(e, xs)
    return out[()] if out.ndim == 0 else out


def f_eigen_cosine_form(e: EigenEvaluator, x):
    """Equivalent form -e^{-x sin th} cos(x cos th + th + (pi/alpha) sign x) - G(x)."""
    x = np.asarray(x, dtype=float)
    th = e.theta
    out = np.zeros(x.shape)
    nz = x != 0
    xs = x[nz]
    out[nz] = (-np.exp(-xs * math.sin(th)) * np.cos(xs * math.cos(th) + th
                                                    + math.pi / e.model.alpha * np.sign(xs))
               - g_eigen(e, xs))
    return out[()] if out.ndim == 0 else out


def g_fourier_closed(e: EigenEvaluator, xi):
    """int G(x) e^{-i xi x} dx in closed form."""
    xi = np.asarray(xi, dtype=float)
    a = e.model.alpha
    th = e.theta
    model = e.model if e.side == PLUS else e.model.mirrored()
    s = math.sin(math.pi / a)
    out = np.empty(xi.shape, complex)
    flat_xi = xi.ravel()
    flat = out.ravel()
    for i, v in enumerate(flat_xi):
        if v == 0.0:
            flat[i] = (2.0 - a) * s
            continue
        near = th == 0.0 and abs(abs(v) - 1.0) < 1e-5
        if near:
            # removable singularity at |xi| = 1 when theta = 0
            d = abs(v) - 1.0
            A = (a - 1.0) / 2.0
            B = (a - 1.0) * (a - 2.0) / 6.0
            sing = -A + (A * A - B) * d
            if v > 0:
                flat[i] = s * (sing + 1.0 / (v + 1.0))
            else:
                flat[i] = s * (sing + 1.0 / (abs(v) + 1.0))
            continue
        p = complex(psi_real_axis(model, v))
        flat[i] = s * (a / (p - 1.0) - 1.0 / (np.exp(-1j * th) * v - 1.0)
                       + 1.0 / (np.exp(1j * th) * v + 1.0))
    return out[()] if out.ndim == 0 else out


def _fourier_tail(kern: KernelIntegral, xi: float, X: float, sign: float) -> complex:
    """int_X^inf G(x) e^{-i sign xi x} dx from the large-x expansion of G."""
    coef = math.sin(kern.angle) * _chebyshev_u(4, math.cos(kern.angle))
    w = 1j * sign * xi
    total = 0j
    for k in range(4):
        p = kern.alpha * (k + 1)
        q = p + 1.0
        amp = kern.prefactor * coef[k] * math.gamma(p + 1.0)
        # int_X^inf x^{-q} e^{-w x} dx ~ e^{-w X} X^{-q} / w * sum_j (-1)^j (q)_j / (w X)^j
        acc = 0j
        term = 1.0 + 0j
        for j in range(12):
            acc += term
            term *= -(q + j) / (w * X)
        total += amp * np.exp(-w * X) * X ** (-q) / w * acc
    return total


def g_fourier_numeric(e: EigenEvaluator, xi: float, policy: QuadPolicy | None = None) -> complex:
    """Fourier transform of g_eigen by x-space quadrature (independent of the closed form)."""
    policy = policy or QuadPolicy(rel_tol=1e-10, abs_tol=1e-12, max_evals=2_000_000)
    xi = float(xi)
    if xi == 0.0:
        raise ValueError("use the absolutely convergent integral for xi = 0: integrate_g_total")
    X = max(200.0, 400.0 / abs(xi))
    period = 2 * math.pi / abs(xi)
    n = int(math.ceil(X / (0.5 * period)))
    pts = list(np.linspace(0.0, X, n + 1)[1:-1])
    pts += [1e-6, 1e-4, 1e-2, 1.0]

    def integrand(x):
        gp = e.kernel(True)(x)
        gm = e.kernel(False)(x)
        ph = np.exp(-1j * xi * x)
        return gp * ph + gm * np.conj(ph)

    body = integrate_adaptive(integrand, 0.0, X, policy, points=pts, label="Fourier transform of G")
    tail = _fourier_tail(e.kernel(True), xi, X, 1.0) + _fourier_tail(e.kernel(False), xi, X, -1.0)
    return complex(body.value + tail)


def integrate_g_total(e: EigenEvaluator, policy: QuadPolicy | None = None) -> float:
    """int_R G(x) dx by x-space quadrature."""
    from .quadrature import integrate_semiinf

    def integrand(x):
        return e.kernel(True)(x) + e.kernel(False)(x)

    a = e.model.alpha
    return float(integrate_semiinf(integrand, 0.0, policy, decay=a + 1.0, split=1.0,
                                   points=[1e-6, 1e-3], label="int G").value)


def symmetric_closed_g(alpha: float, s: float, x: float, scaled_variant: bool = False) -> float:
    """The explicit theta = 0 formula for G^+(s x) evaluated with scipy's adaptive quad.

    The default uses cos(pi alpha / 2) in the denominator and agrees with the general kernel
    at theta = 0. ``scaled_variant=True`` evaluates the alternative form with an extra factor
    s^{alpha-1} and cos(pi alpha), which does not.
    """
    from scipy.integrate import quad

    c = alpha * math.sin(math.pi * alpha / 2) * math.sin(math.pi / alpha) / math.pi
    if scaled_variant:
        c *= s ** (alpha - 1.0)
        cosang = math.cos(math.pi * alpha)
    else:
        cosang = math.cos(math.pi * alpha / 2)
    y = abs(s * x)

    def f(t):
        ta = t ** alpha
        return ta / (1.0 - 2.0 * ta * cosang + ta * ta) * math.exp(-y * t)

    val = 0.0
    edges = [0.0, 0.5, 1.0, 2.0, 8.0, 64.0]
    for lo, hi in zip(edges[:-1], edges[1:]):
        val += quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
    val += quad(f, 64.0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=400)[0]
    return c * val


def symmetric_closed_f(alpha: float, s: float, x: float, scaled_variant: bool = False) -> float:
    y = s * x
    return math.sin(abs(y) + math.pi / alpha - math.pi / 2) - symmetric_closed_g(alpha, s, x, scaled_variant)
