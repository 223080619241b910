"""Spectral quantities of the process killed at the origin.

phi_j(lambda), j = 0..4, has two routes: real-axis Fourier integrals and the rotated
ray integrals (1/pi) int h_j(r) / (r^alpha + lambda) dr. On the cut lambda = -s^alpha
the boundary values are K_j(s) - i L_j(s), where K_j is a principal value. From these
the transition kernel's bilinear form follows by inverting a Stieltjes transform, and
it can be compared with the eigenfunction expansion built from F^+ and F^-.

Orientation: phi_4(lambda) for the pair (f, g) equals int int g(x) f(y) u^0_lambda(x, y) dx dy
for the process of ``StableModel`` (E e^{i xi X_t} = e^{-t psi(-xi)}), that is
int int f(x) g(y) u^0_lambda(x, y) for the dual process -X. The bilinear forms below
inherit this.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigen import MINUS, PLUS, EigenEvaluator, f_eigen, g_eigen
from .model import StableModel
from .quadrature import (DEFAULT_POLICY, QuadPolicy, QuadResult, gauss_legendre_panels,
                         integrate_adaptive, integrate_pv_power, integrate_semiinf)
from .testfn import RIGHT, RayLaplace, RayTransformPair, TestFunction, laplace

log = logging.getLogger(__name__)

PREFACTOR_CANDIDATES = {"one": 1.0, "one_over_pi": 1.0 / math.pi}
SOKHOTSKI_EPS = (1e-3, 1e-4, 1e-5)


def _check_j(j: int) -> None:
    if j not in (0, 1, 2, 3, 4):
        raise ValueError("j must be one of 0, 1, 2, 3, 4")


def _assemble(v: np.ndarray, j: int):
    """Pick component j from (phi_0..phi_3); j = 4 is phi_3 - phi_1 phi_2 / phi_0."""
    if j == 4:
        return complex(v[3] - v[1] * v[2] / v[0])
    return complex(v[j])


# --- phi_j, real-axis route ---------------------------------------------------------------

@dataclass
class _FourierTransforms:
    """L f(-i xi) and L g(i xi) for xi > 0 (the values at -xi are the conjugates)."""

    f: TestFunction
    g: TestFunction
    lf: RayLaplace = field(default=None, repr=False)
    lg: RayLaplace = field(default=None, repr=False)

    def __post_init__(self):
        self.lf = self.lf or RayLaplace(self.f, -1j)
        self.lg = self.lg or RayLaplace(self.g, 1j)


_FOURIER_CACHE: dict = {}


def _fourier_transforms(pair: RayTransformPair) -> _FourierTransforms:
    key = (pair.f, pair.g)
    if key not in _FOURIER_CACHE:
        if len(_FOURIER_CACHE) > 16:
            _FOURIER_CACHE.clear()
        _FOURIER_CACHE[key] = _FourierTransforms(pair.f, pair.g)
    return _FOURIER_CACHE[key]


def phi_fourier_all(pair: RayTransformPair, model: StableModel, lam: float,
                    policy: QuadPolicy | None = None) -> QuadResult:
    """phi_0..phi_3 at real lambda > 0 from the real-axis Fourier integrals.

    On xi > 0, psi(xi) = e^{-i alpha theta} xi^alpha and psi(-xi) = e^{i alpha theta} xi^alpha;
    the integrands at -xi are complex conjugates, so phi_j = (1/pi) Re int_0^inf.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive on the Fourier route")
    a, th = model.alpha, model.theta
    tr = _fourier_transforms(pair)
    rot_p = complex(math.cos(a * th), -math.sin(a * th))   # psi(xi) / xi^a
    rot_m = rot_p.conjugate()                              # psi(-xi) / xi^a

    def f(xi):
        xa = xi ** a
        lf, lg = tr.lf(xi), tr.lg(xi)
        d = 1.0 / (lam + rot_p * xa)
        out = np.empty((len(xi), 4))
        out[:, 0] = (1.0 / (lam + rot_m * xa)).real
        out[:, 1] = (lf * d).real
        out[:, 2] = (lg * d).real
        out[:, 3] = (lf * lg * d).real
        return out

    scale = max(1.0, lam ** (1.0 / a))
    pts = list(np.geomspace(1e-3, scale, 8)[:-1]) + [0.25 * scale, 0.5 * scale]
    res = integrate_semiinf(f, 0.0, policy, decay=a, split=2.0 * scale, points=pts,
                            label="phi_j Fourier route")
    return QuadResult(np.asarray(res.value) / math.pi, res.abs_err_estimate / math.pi, res.n_evals)


def phi_fourier(pair: RayTransformPair, model: StableModel, lam: float, j: int,
                policy: QuadPolicy | None = None) -> complex:
    _check_j(j)
    return _assemble(phi_fourier_all(pair, model, lam, policy).value, j)


# --- phi_j, ray route ---------------------------------------------------------------------

def phi_ray_all(pair: RayTransformPair, model: StableModel, lam: complex,
                policy: QuadPolicy | None = None) -> QuadResult:
    """phi_0..phi_3 = (1/pi) int_0^inf h_j(r) / (r^alpha + lambda) dr for lambda off (-inf, 0]."""
    lam = complex(lam)
    if lam.imag == 0 and lam.real <= 0:
        raise ValueError("lambda must lie off the cut (-inf, 0]")
    a = model.alpha

    def f(r):
        return pair.h(r) / (r ** a + lam)[:, None]

    r0 = abs(lam) ** (1.0 / a)
    scale = max(1.0, r0)
    pts = list(np.geomspace(1e-3, scale, 8)[:-1])
    arg = abs(math.atan2(lam.imag, lam.real))
    if arg > math.pi / 2:
        # close to the cut the pole sits near r0; grade the mesh towards it
        width = abs(lam.imag) / (a * r0 ** (a - 1.0)) if lam.imag else 1e-12
        ladder = width * 2.0 ** np.arange(0, 60)
        ladder = ladder[ladder < 0.5 * r0]
        pts += [r0] + list(r0 - ladder) + list(r0 + ladder)
    tight = policy or DEFAULT_POLICY
    res = integrate_semiinf(f, 0.0, tight, decay=a, split=4.0 * scale, points=pts,
                            label="phi_j ray route")
    return QuadResult(np.asarray(res.value) / math.pi, res.abs_err_estimate / math.pi, res.n_evals)


def phi_ray(pair: RayTransformPair, model: StableModel, lam: complex, j: int,
            policy: QuadPolicy | None = None) -> complex:
    _check_j(j)
    return _assemble(phi_ray_all(pair, model, lam, policy).value, j)


def phi0_closed(model: StableModel, lam) -> complex:
    """phi_0(lambda) = cos(theta) / (alpha sin(pi/alpha)) lambda^{1/alpha - 1} (principal branch)."""
    a = model.alpha
    return math.cos(model.theta) / (a * math.sin(math.pi / a)) * complex(lam) ** (1.0 / a - 1.0)


def phi0_ray(model: StableModel, lam: float, policy: QuadPolicy | None = None) -> float:
    """phi_0(lambda) = (cos theta / pi) int_0^inf dr / (r^alpha + lambda) by quadrature."""
    a = model.alpha
    scale = lam ** (1.0 / a)
    res = integrate_semiinf(lambda r: 1.0 / (r ** a + lam), 0.0, policy, decay=a, split=scale,
                            points=[0.5 * scale], label="phi_0 ray route")
    return math.cos(model.theta) * float(res.value) / math.pi


def boundary_limit(pair: RayTransformPair, model: StableModel, s: float,
                   eps: tuple = SOKHOTSKI_EPS, policy: QuadPolicy | None = None) -> np.ndarray:
    """phi_0..phi_3 at -s^alpha + i0, extrapolated from -s^alpha + i eps.

    phi_j(-s^alpha + i eps) is smooth in eps, so the quadratic through the three
    samples is evaluated at eps = 0.
    """
    sa = s ** model.alpha
    e = np.asarray(eps, float)
    vals = np.array([phi_ray_all(pair, model, complex(-sa, ei), policy).value for ei in e])
    # Lagrange weights at 0
    w = np.array([np.prod([-e[k] / (e[i] - e[k]) for k in range(len(e)) if k != i])
                  for i in range(len(e))])
    return w @ vals


# --- boundary values K_j, L_j ----------------------------------------------------------------

@dataclass
class SpectralTable:
    model: StableModel
    pair: RayTransformPair
    s_grid: np.ndarray
    K: np.ndarray          # shape (4, n)
    L: np.ndarray          # shape (4, n)
    K_err: np.ndarray = None

    def boundary_values(self) -> np.ndarray:
        """phi_j(-s^alpha) = K_j(s) - i L_j(s), shape (4, n)."""
        return self.K - 1j * self.L

    def im_phi4(self) -> np.ndarray:
        return _im_phi4_from_kl(self.K, self.L)

    def im_phi2_over_phi0(self) -> np.ndarray:
        b = self.boundary_values()
        return (b[2] / b[0]).imag


def l_closed(pair: RayTransformPair, model: StableModel, s) -> np.ndarray:
    """L_j(s) = h_j(s) / (alpha s^{alpha-1}), shape (4, n)."""
    s = np.atleast_1d(np.asarray(s, float))
    a = model.alpha
    return (pair.h(s) / (a * s[:, None] ** (a - 1.0))).T


def k0_closed(model: StableModel, s) -> np.ndarray:
    a = model.alpha
    return -math.cos(model.theta) / (math.tan(math.pi / a) * a * np.asarray(s, float) ** (a - 1.0))


def _k_single(pair: RayTransformPair, model: StableModel, s: float, policy: QuadPolicy):
    res = integrate_pv_power(pair.h, s, model.alpha, policy, label="K_j principal value")
    return np.asarray(res.value) / math.pi, res.abs_err_estimate / math.pi


def kl_table(pair: RayTransformPair, model: StableModel, s_grid, policy: QuadPolicy | None = None,
             workers: int = 1) -> SpectralTable:
    s = np.asarray(s_grid, float)
    if s.ndim != 1 or np.any(s <= 0) or np.any(np.diff(s) < 0):
        raise ValueError("s_grid must be positive and sorted")
    policy = policy or DEFAULT_POLICY
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(lambda si: _k_single(pair, model, si, policy), s))
    else:
        rows = [_k_single(pair, model, si, policy) for si in s]
    K = np.array([r[0] for r in rows]).T
    K_err = np.array([r[1] for r in rows])
    # h_0 is constant, so the PV routine reduces to the closed form; write it exactly
    K[0] = k0_closed(model, s)
    return SpectralTable(model, pair, s, K, l_closed(pair, model, s), K_err)


def _im_phi4_from_kl(K: np.ndarray, L: np.ndarray) -> np.ndarray:
    """-L3 + L1 L2 / L0 - Im(1/b0)^{-1} Im(b1/b0) Im(b2/b0) with b_j = K_j - i L_j."""
    b = K - 1j * L
    inv0 = (1.0 / b[0]).imag
    return -L[3] + L[1] * L[2] / L[0] - (b[1] / b[0]).imag * (b[2] / b[0]).imag / inv0


def im_phi4_neg(pair: RayTransformPair, model: StableModel, s: float,
                policy: QuadPolicy | None = None) -> float:
    """Im phi_4(-s^alpha), the jump of phi_4 across the cut."""
    tab = kl_table(pair, model, [s], policy)
    return float(tab.im_phi4()[0])


# --- x-space integrals against a test function ---------------------------------------------

_LOG_FLOOR = 40.0  # truncate where |f| e^{growth} < e^{-40}


def _atom_extent(s_decay: float, growth: float) -> float:
    w = 1.0
    while s_decay * w * math.log(w + math.e) - growth * w < _LOG_FLOOR:
        w *= 1.25
    return w


def _peak_excess(s_decay: float, growth: float, extent: float) -> float:
    w = np.linspace(0.0, extent, 2000)
    return float(np.max(growth * w - s_decay * w * np.log(w + math.e)))


def xspace_integral(testf: TestFunction, kernel, s: float, exp_rate: float,
                    policy: QuadPolicy | None = None) -> QuadResult:
    """int kernel(x) testf(x) dx, where kernel(x) returns an (n, m) array that grows at most
    like exp(exp_rate * x) (exp_rate may have either sign).

    Each atom is integrated on its half-line up to the point where the atom times the
    growth envelope is negligible. A large cancellation factor is logged and folded
    into the error estimate.
    """
    policy = policy or QuadPolicy(rel_tol=1e-11, abs_tol=1e-14, max_evals=400_000)
    total = None
    err = 0.0
    n = 0
    for atom in testf.atoms:
        sgn = 1.0 if atom.kind == RIGHT else -1.0
        growth = max(0.0, sgn * exp_rate)
        extent = _atom_extent(atom.s_decay, growth)
        excess = _peak_excess(atom.s_decay, growth, extent)
        sd = atom.s_decay

        def f(w, sgn=sgn, sd=sd):
            k = np.asarray(kernel(sgn * w))
            return k * np.exp(-sd * w * np.log(w + math.e))[:, None]

        pts = list(10.0 ** np.arange(-12.0, 0.0)) + list(np.linspace(0.0, extent, 9)[1:-1])
        if s > 0:
            half = math.pi / max(s, 1e-300)
            m = int(min(2000, math.ceil(extent / half)))
            pts += list(np.linspace(0.0, extent, m + 1)[1:-1])
        res = integrate_adaptive(f, 0.0, extent, policy, points=pts, label="x-space pairing")
        if excess > math.log(1e6):
            log.warning("x-space pairing at s=%g loses about %.0f digits to cancellation",
                        s, excess / math.log(10))
        total = res.value if total is None else total + res.value
        err += res.abs_err_estimate + 1e-16 * math.exp(max(excess, 0.0)) * extent
        n += res.n_evals
    return QuadResult(np.asarray(total), err, n)


def _k_kernel(model: StableModel, s: float):
    """Kernel of the x-space representation of K_1 (before the 1/(alpha s^{alpha-1}) factor)."""
    th, a = model.theta, model.alpha
    e = EigenEvaluator(model, PLUS)
    sn = math.sin(math.pi / a)

    def kernel(x):
        y = s * x
        out = np.empty(x.shape)
        nz = x != 0
        out[~nz] = 0.0
        yn = y[nz]
        out[nz] = g_eigen(e, yn) / sn - (np.exp(-yn * math.sin(th))
                                        * np.sin(yn * math.cos(th) + th) * np.sign(yn))
        return out[:, None]

    return kernel


def k1_xspace(f: TestFunction, model: StableModel, s: float,
              policy: QuadPolicy | None = None) -> float:
    """K_1(s) as an absolutely convergent integral against f in x-space."""
    if not s > 0:
        raise ValueError("s must be positive")
    a = model.alpha
    res = xspace_integral(f, _k_kernel(model, s), s, -s * math.sin(model.theta), policy)
    return float(res.value[0]) / (a * s ** (a - 1.0))


def k2_xspace(g: TestFunction, model: StableModel, s: float,
              policy: QuadPolicy | None = None) -> float:
    """K_2(s): the K_1 representation applied to x -> g(-x)."""
    return k1_xspace(g.mirrored(), model, s, policy)


def _f_pairings(model: StableModel, testf: TestFunction, s: float, side: str,
                policy: QuadPolicy | None = None) -> np.ndarray:
    """For side PLUS: (int F^+(s x) f dx, int e^{-s x sin th} sin(s x cos th) f dx).
    For side MINUS: (int F^-(s y) g dy, int e^{s y sin th} sin(s y cos th) g dy)."""
    th = model.theta
    e = EigenEvaluator(model, side)
    sgn = 1.0 if side == PLUS else -1.0

    def kernel(x):
        y = s * x
        out = np.empty((len(x), 2))
        out[:, 0] = f_eigen(e, y)
        out[:, 1] = np.exp(-sgn * y * math.sin(th)) * np.sin(y * math.cos(th))
        return out

    res = xspace_integral(testf, kernel, s, -sgn * s * math.sin(th), policy)
    return np.asarray(res.value)


def f_plus_pairing(f: TestFunction, model: StableModel, s: float) -> float:
    return float(_f_pairings(model, f, s, PLUS)[0])


def f_minus_pairing(g: TestFunction, model: StableModel, s: float) -> float:
    return float(_f_pairings(model, g, s, MINUS)[0])


def sine_pairings(pair: RayTransformPair, model: StableModel, s: float) -> tuple[float, float]:
    """(int e^{-s x sin th} sin(s x cos th) f dx, int e^{s y sin th} sin(s y cos th) g dy)."""
    return (float(_f_pairings(model, pair.f, s, PLUS)[1]),
            float(_f_pairings(model, pair.g, s, MINUS)[1]))


# --- identities on the cut --------------------------------------------------------------------

def identity_residuals(pair: RayTransformPair, model: StableModel, s: float) -> dict:
    """Relative residuals of the product and quotient identities at one s."""
    tab = kl_table(pair, model, [s])
    K, L = tab.K[:, 0], tab.L[:, 0]
    b = K - 1j * L
    a, th = model.alpha, model.theta
    sn, cs = math.sin(math.pi / a), math.cos(th)
    pf = _f_pairings(model, pair.f, s, PLUS)
    pg = _f_pairings(model, pair.g, s, MINUS)

    def rel(x, y):
        return abs(x - y) / max(abs(y), 1e-300)

    lhs_prod = L[3] - L[1] * L[2] / L[0]
    rhs_prod = pf[1] * pg[1] / (a * s ** (a - 1.0) * cs)
    out = {
        "s": s,
        "product_identity": rel(lhs_prod, rhs_prod),
        "kl0": rel((1.0 / b[0]).imag, a * s ** (a - 1.0) * sn ** 2 / cs),
        "kl1": rel((b[1] / b[0]).imag, -sn / cs * pf[0]),
        "kl2": rel((b[2] / b[0]).imag, -sn / cs * pg[0]),
        "k1_xspace": rel(k1_xspace(pair.f, model, s), K[1]),
        "k2_xspace": rel(k2_xspace(pair.g, model, s), K[2]),
        "im_phi4_direct": rel(_im_phi4_from_kl(K[:, None], L[:, None])[0],
                              (b[3] - b[1] * b[2] / b[0]).imag),
    }
    return out


# --- Stieltjes inversion in time ----------------------------------------------------------------

def _s_nodes(s_min: float, s_max: float, width: float = 0.5, n: int = 12):
    """Gauss-Legendre nodes and weights for ds on [s_min, s_max], uniform panels in log s."""
    lo, hi = math.log(s_min), math.log(s_max)
    m = max(1, int(math.ceil((hi - lo) / width)))
    u, w = gauss_legendre_panels(np.linspace(lo, hi, m + 1), n)
    s = np.exp(u)
    return s, w * s


def _s_upper(model: StableModel, t_min: float) -> float:
    return (40.0 / t_min) ** (1.0 / model.alpha)


@dataclass
class TimeDomainTable:
    """Im phi_4(-s^alpha) on a fixed s-quadrature, reusable for many t."""

    model: StableModel
    s: np.ndarray
    weights: np.ndarray
    im_phi4: np.ndarray
    t_min: float

    def value(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, float))
        if np.any(t < self.t_min * (1 - 1e-12)):
            raise ValueError(f"table built for t >= {self.t_min}")
        a = self.model.alpha
        k = self.weights * self.s ** (a - 1.0) * self.im_phi4
        return -(a / math.pi) * (np.exp(-np.outer(t, self.s ** a)) @ k)


def time_domain_table(pair: RayTransformPair, model: StableModel, t_min: float,
                      s_min: float = 1e-7, policy: QuadPolicy | None = None,
                      workers: int = 1) -> TimeDomainTable:
    s, w = _s_nodes(s_min, _s_upper(model, t_min))
    tab = kl_table(pair, model, s, policy, workers)
    return TimeDomainTable(model, s, w, tab.im_phi4(), t_min)


def bilinear_timedomain(pair: RayTransformPair, model: StableModel, t: float,
                        policy: QuadPolicy | None = None) -> float:
    """-(1/pi) int_0^inf e^{-r t} Im phi_4(-r) dr, evaluated in s = r^{1/alpha}.

    This is int int g(x) f(y) p^0_t(x, y) dx dy for the model's process (see the module
    docstring on orientation).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    return float(time_domain_table(pair, model, t, policy=policy).value(t)[0])


def laplace_of_timedomain(table: TimeDomainTable, lam: float, t_max: float | None = None) -> float:
    """int_0^inf e^{-lambda t} J(t) dt by Gauss-Legendre in log t, with J from the table.

    The stretch [0, t_min] is bounded by t_min max|J| and reported through the caller's
    choice of t_min.
    """
    t_max = t_max or 60.0 / lam
    u, w = gauss_legendre_panels(np.linspace(math.log(table.t_min), math.log(t_max),
                                             int(4 * math.log(t_max / table.t_min)) + 1), 16)
    t = np.exp(u)
    return float(np.sum(w * t * np.exp(-lam * t) * table.value(t)))


@dataclass
class BilinearResult:
    t: float
    value_reference: float
    value_eigenform: float
    prefactor_used: float
    abs_err: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.value_reference) and math.isfinite(self.value_eigenform)):
            raise ArithmeticError("bilinear form evaluation produced a non-finite value")


@dataclass
class EigenformTable:
    """Integrand of the eigenfunction expansion on a fixed s-quadrature (prefactor excluded):
    (int F^+(s x) f)(int F^-(s y) g) + (sine pairing of f)(sine pairing of g), over cos theta."""

    model: StableModel
    s: np.ndarray
    weights: np.ndarray
    integrand: np.ndarray
    t_min: float

    def value(self, t, prefactor: float) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, float))
        if np.any(t < self.t_min * (1 - 1e-12)):
            raise ValueError(f"table built for t >= {self.t_min}")
        a = self.model.alpha
        return prefactor * (np.exp(-np.outer(t, self.s ** a)) @ (self.weights * self.integrand))


def eigenform_table(pair: RayTransformPair, model: StableModel, t_min: float,
                    s_min: float = 1e-7) -> EigenformTable:
    s, w = _s_nodes(s_min, _s_upper(model, t_min))
    vals = np.empty(len(s))
    cs = math.cos(model.theta)
    for i, si in enumerate(s):
        pf = _f_pairings(model, pair.f, si, PLUS)
        pg = _f_pairings(model, pair.g, si, MINUS)
        vals[i] = (pf[0] * pg[0] + pf[1] * pg[1]) / cs
    return EigenformTable(model, s, w, vals, t_min)


def bilinear_eigenform(pair: RayTransformPair, model: StableModel, t: float, prefactor: float,
                       policy: QuadPolicy | None = None) -> BilinearResult:
    if not t > 0:
        raise ValueError("t must be positive")
    eig = eigenform_table(pair, model, t)
    ref = bilinear_timedomain(pair, model, t, policy)
    return BilinearResult(t, ref, float(eig.value(t, prefactor)[0]), prefactor)


def calibrate_prefactor(cases, rel_tol: float = 1e-6, report_path=None) -> dict:
    """Decide the eigenform prefactor from cases (pair, model, t_values).

    Returns a report with each candidate's worst relative residual and the selected key
    (optionally written as JSON); raises if not exactly one candidate passes.
    """
    resid = {k: 0.0 for k in PREFACTOR_CANDIDATES}
    rows = []
    for pair, model, ts in cases:
        ts = np.atleast_1d(np.asarray(ts, float))
        eig = eigenform_table(pair, model, float(ts.min()))
        ref = time_domain_table(pair, model, float(ts.min())).value(ts)
        for i, ti in enumerate(ts):
            row = {"alpha": model.alpha, "rho": model.rho, "f": str(pair.f), "g": str(pair.g),
                   "t": float(ti), "reference": float(ref[i])}
            for k, c in PREFACTOR_CANDIDATES.items():
                v = float(eig.value(ti, c)[0])
                r = abs(v - ref[i]) / max(abs(ref[i]), 1e-300)
                row[k] = v
                resid[k] = max(resid[k], r)
            rows.append(row)
    passing = [k for k, r in resid.items() if r <= rel_tol]
    if len(passing) != 1:
        raise ArithmeticError(f"prefactor calibration is ambiguous: residuals {resid}")
    report = {"selected": passing[0], "value": PREFACTOR_CANDIDATES[passing[0]],
              "max_rel_residual": resid, "tolerance": rel_tol, "cases": rows}
    if report_path is not None:
        import json
        from pathlib import Path
        Path(report_path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


PREFACTOR_REPORT = Path(__file__).with_name("fixtures") / "bilinear_prefactor.json"


def calibrated_prefactor() -> float:
    """The prefactor selected by the stored calibration report."""
    import json
    data = json.loads(PREFACTOR_REPORT.read_text())
    return PREFACTOR_CANDIDATES[data["selected"]]


def default_calibration_cases():
    from .model import make_model
    from .testfn import explog, sum_of
    m1, m2, m3 = make_model(1.5, 0.45), make_model(1.5, 0.5), make_model(1.2, 0.6)
    return [
        (RayTransformPair(explog("+", 1), explog("-", 1), m1), m1, (0.5, 1.0, 2.0)),
        (RayTransformPair(sum_of(explog("+", 1), explog("-", 2)), explog("+", 1.5), m2), m2, (1.0,)),
        (RayTransformPair(explog("-", 1), explog("+", 2), m3), m3, (1.0,)),
    ]


# --- phi_5 and the quotient route -------------------------------------------------------------

def phi5(g: TestFunction, model: StableModel, lam: complex, policy: QuadPolicy | None = None) -> complex:
    """L g(0)/lambda - phi_2(lambda) / (lambda phi_0(lambda)), phi_2 from the ray route."""
    pair = RayTransformPair(g, g, model)
    v = phi_ray_all(pair, model, lam, policy).value
    lam = complex(lam)
    return complex(laplace(g, 0.0)) / lam - complex(v[2]) / (lam * phi0_closed(model, lam))


def im_phi5_neg(g: TestFunction, model: StableModel, s: float,
                policy: QuadPolicy | None = None) -> float:
    """Im phi_5(-s^alpha) = s^{-alpha} Im(phi_2 / phi_0)(-s^alpha)."""
    pair = RayTransformPair(g, g, model)
    tab = kl_table(pair, model, [s], policy)
    return float(tab.im_phi2_over_phi0()[0]) * s ** (-model.alpha)


def quotient_survival(g: TestFunction, model: StableModel, t, s_min: float = 1e-12,
                      policy: QuadPolicy | None = None) -> np.ndarray:
    """int P^x(tau_0 > t) g(x) dx = -(alpha/pi) int_0^inf e^{-s^alpha t} Im(phi_2/phi_0)(-s^alpha) ds / s,
    with the boundary values taken from principal values (no eigenfunctions involved)."""
    t = np.atleast_1d(np.asarray(t, float))
    pair = RayTransformPair(g, g, model)
    s, w = _s_nodes(s_min, _s_upper(model, float(t.min())))
    q = kl_table(pair, model, s, policy).im_phi2_over_phi0()
    a = model.alpha
    body = np.exp(-np.outer(t, s ** a)) @ (w * q / s)
    # below s_min the quotient behaves like c s^{alpha-1}
    head = q[0] * (s_min / s[0]) ** (a - 1.0) / (a - 1.0)
    return -(a / math.pi) * (body + head)


__all__ = [
    "SpectralTable", "BilinearResult", "PREFACTOR_CANDIDATES", "phi_fourier", "phi_fourier_all",
    "phi_ray", "phi_ray_all", "phi0_closed", "phi0_ray", "boundary_limit", "kl_table", "l_closed", "k0_closed",
    "im_phi4_neg", "k1_xspace", "k2_xspace", "f_plus_pairing", "f_minus_pairing", "sine_pairings",
    "identity_residuals", "time_domain_table", "bilinear_timedomain", "laplace_of_timedomain",
    "eigenform_table", "bilinear_eigenform", "calibrate_prefactor", "calibrated_prefactor",
    "default_calibration_cases", "PREFACTOR_REPORT", "phi5", "im_phi5_neg",
    "quotient_survival",
]
