"""Survival function and density of the hitting time of the origin.

Both are one-dimensional integrals over s of F^-(s x) against exp(-s^alpha t).
After the substitution s = sigma / |x| they depend on (x, t) only through
T = t / |x|^alpha and sign(x). F^- splits into an exponential-oscillatory part,
which is integrated along a ray in the complex sigma-plane where it decays, and the
completely monotone part G, which is integrated on the real axis.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eigen import MINUS, EigenEvaluator, KernelIntegral, f_eigen
from .model import StableModel
from .quadrature import (DEFAULT_POLICY, NonConvergenceError, QuadPolicy, QuadResult,
                         gauss_legendre_panels, integrate_adaptive, integrate_semiinf_damped)
from .testfn import RIGHT, TestFunction, explog

log = logging.getLogger(__name__)

CALIBRATED = "calibrated"
CANDIDATE_1 = "candidate_1"
CANDIDATE_ASIN = "candidate_asin"
CONSTANT_MODES = (CALIBRATED, CANDIDATE_1, CANDIDATE_ASIN)

FIXTURE_DIR = Path(__file__).with_name("fixtures")
CALIBRATION_FILE = FIXTURE_DIR / "survival_constant.json"


class AmbiguousCalibrationError(RuntimeError):
    """Neither or both constant candidates satisfy the calibration criteria."""


def constant_candidates(model: StableModel) -> dict:
    """The two normalizing constants in front of the survival integral."""
    a, c = model.alpha, math.cos(model.theta)
    return {
        CANDIDATE_1: 1.0 / (math.pi * c),
        CANDIDATE_ASIN: a * math.sin(math.pi / a) / (math.pi * c),
    }


def _calibrated_mode() -> str:
    try:
        data = json.loads(CALIBRATION_FILE.read_text())
        mode = data["selected"]
    except (OSError, KeyError, ValueError) as exc:
        raise AmbiguousCalibrationError(
            f"no usable calibration report at {CALIBRATION_FILE}; run calibrate_constant") from exc
    if mode not in (CANDIDATE_1, CANDIDATE_ASIN):
        raise AmbiguousCalibrationError(f"calibration report selects unknown mode {mode!r}")
    return mode


def resolve_constant(model: StableModel, mode: str = CALIBRATED) -> float:
    if mode not in CONSTANT_MODES:
        raise ValueError(f"constant_mode must be one of {CONSTANT_MODES}")
    if mode == CALIBRATED:
        mode = _calibrated_mode()
    return constant_candidates(model)[mode]


@dataclass(frozen=True)
class SurvivalQuery:
    model: StableModel
    x: float
    t: float
    constant_mode: str = CALIBRATED

    def __post_init__(self):
        if self.x == 0:
            raise ValueError("x must be non-zero")
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.constant_mode not in CONSTANT_MODES:
            raise ValueError(f"constant_mode must be one of {CONSTANT_MODES}")

    @property
    def scaled_time(self) -> float:
        return self.t / abs(self.x) ** self.model.alpha


@dataclass
class SurvivalCurve:
    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    abs_err: np.ndarray
    constant_used: float
    kind: str = "survival"
    meta: dict = field(default_factory=dict)


# --- the scaled integrals ------------------------------------------------------------------

class _ScaledIntegrals:
    """I(T) = int_0^inf e^{-sigma^a T} F^-(eps sigma) / sigma d sigma and
    D(T) = int_0^inf sigma^{a-1} e^{-sigma^a T} F^-(eps sigma) d sigma for one side eps."""

    def __init__(self, model: StableModel, eps: int, policy: QuadPolicy):
        a = model.alpha
        self.alpha = a
        th = eps * model.theta
        self.phi1 = math.pi / a - math.pi / 2 - th
        self.z = -1j * complex(math.cos(th), -math.sin(th))
        # ray between the decay sectors of exp(-sigma z) and exp(-sigma^a T)
        self.beta = 0.5 * (th + math.pi / (2 * a))
        self.kernel = KernelIntegral(a, a * (math.pi / 2 + th))
        self.g0 = self.kernel.at_zero
        self.policy = policy

    def _u_range(self, T: float) -> tuple[float, float]:
        a = self.alpha
        damp = math.cos(a * self.beta)
        hi = math.log((60.0 / (T * min(damp, 1.0))) ** (1.0 / a))
        hi = max(hi, math.log(60.0))
        # G - G(0) = O(sigma^{a-1}): start where that power is below 1e-15
        return min(-40.0, -35.0 / (a - 1.0)), hi

    def _exp_part(self, T: float, weight_power: float) -> QuadResult:
        """int over sigma = r e^{i beta} of sigma^{p} e^{-sigma^a T} (e^{-sigma z} - 1) dsigma/sigma."""
        a, p = self.alpha, weight_power
        eb = complex(math.cos(self.beta), math.sin(self.beta))
        rot_a = np.exp(1j * a * self.beta)
        zz = self.z * eb
        lo, hi = self._u_range(T)

        def f(u):
            r = np.exp(u)
            w = r * zz
            # expm1 keeps the small-r end accurate
            diff = np.where(np.abs(w) < 1e-3, -w + w * w / 2 - w ** 3 / 6, np.exp(-w) - 1.0)
            return (r * eb) ** p * np.exp(-(r ** a) * T * rot_a) * diff

        pts = list(np.linspace(lo, hi, int(hi - lo) // 2 + 2)[1:-1])
        return integrate_adaptive(f, lo, hi, self.policy, points=pts, label="survival ray integral")

    def _g_part(self, T: float, weight_power: float) -> QuadResult:
        a, p = self.alpha, weight_power
        lo, hi = self._u_range(T)

        def f(u):
            s = np.exp(u)
            return s ** p * np.exp(-(s ** a) * T) * (self.kernel(s) - self.g0)

        pts = list(np.linspace(lo, hi, int(hi - lo) // 2 + 2)[1:-1])
        return integrate_adaptive(f, lo, hi, self.policy, points=pts, label="survival G integral")

    def survival_integral(self, T: float) -> tuple[float, float]:
        e = self._exp_part(T, 0.0)
        g = self._g_part(T, 0.0)
        val = (np.exp(1j * self.phi1) * e.value).imag - g.value
        return float(val), e.abs_err_estimate + g.abs_err_estimate

    def density_integral(self, T: float) -> tuple[float, float]:
        a = self.alpha
        e = self._exp_part(T, a)
        g = self._g_part(T, a)
        val = (np.exp(1j * self.phi1) * e.value).imag - g.value
        return float(val), e.abs_err_estimate + g.abs_err_estimate


def _integrals(model: StableModel, x: float, policy: QuadPolicy | None) -> _ScaledIntegrals:
    return _ScaledIntegrals(model, 1 if x > 0 else -1, policy or DEFAULT_POLICY)


def survival_with_error(q: SurvivalQuery, policy: QuadPolicy | None = None) -> tuple[float, float]:
    c = resolve_constant(q.model, q.constant_mode)
    val, err = _integrals(q.model, q.x, policy).survival_integral(q.scaled_time)
    return c * val, c * err


def survival(q: SurvivalQuery, policy: QuadPolicy | None = None) -> float:
    """P^x(tau_0 > t)."""
    return survival_with_error(q, policy)[0]


def survival_direct(q: SurvivalQuery, policy: QuadPolicy | None = None) -> float:
    """Same quantity integrated on the real s-axis with the growing factor kept as is.

    Raises NonConvergenceError when t is so small that the integrand's envelope
    exceeds the overflow-safe range.
    """
    policy = policy or DEFAULT_POLICY
    m, x, t = q.model, q.x, q.t
    e = EigenEvaluator(m, MINUS)
    a = m.alpha

    def f(s):
        return f_eigen(e, s * x) / s

    growth = abs(x * math.sin(m.theta))
    # graded mesh toward s = 0 where F^-(s x) = O(s^{a-1})
    pts = [2.0 ** (-k / (a - 1.0)) / abs(x) for k in range(1, 40)]
    pts = [p for p in pts if p > 1e-300]
    period = 2 * math.pi / (abs(x) * math.cos(m.theta))
    res = integrate_semiinf_damped(f, t, a, growth, policy, period=period, points=pts,
                                   label="survival (real axis)")
    return resolve_constant(m, q.constant_mode) * float(res.value)


def hitting_density_with_error(q: SurvivalQuery, policy: QuadPolicy | None = None):
    c = resolve_constant(q.model, q.constant_mode)
    a = q.model.alpha
    val, err = _integrals(q.model, q.x, policy).density_integral(q.scaled_time)
    scale = abs(q.x) ** (-a)
    return c * scale * val, c * scale * err


def hitting_density(q: SurvivalQuery, policy: QuadPolicy | None = None) -> float:
    """-d/dt P^x(tau_0 > t)."""
    return hitting_density_with_error(q, policy)[0]


def survival_curve(model: StableModel, x: float, t_grid, constant_mode: str = CALIBRATED,
                   kind: str = "survival", policy: QuadPolicy | None = None) -> SurvivalCurve:
    """Survival or density along a t-grid at fixed x (one integrator setup shared)."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t-grid must be positive")
    if x == 0:
        raise ValueError("x must be non-zero")
    c = resolve_constant(model, constant_mode)
    ints = _integrals(model, x, policy)
    vals, errs = np.empty(t.shape), np.empty(t.shape)
    a = model.alpha
    for i, ti in enumerate(t):
        T = ti / abs(x) ** a
        if kind == "survival":
            v, er = ints.survival_integral(T)
            vals[i], errs[i] = c * v, c * er
        elif kind == "density":
            v, er = ints.density_integral(T)
            sc = c * abs(x) ** (-a)
            vals[i], errs[i] = sc * v, sc * er
        else:
            raise ValueError("kind must be 'survival' or 'density'")
    return SurvivalCurve(np.full(t.shape, float(x)), t, vals, errs, c, kind)


# --- cross-checks and calibration ------------------------------------------------------------

def _unit_survival(model: StableModel, x: float, t: float, policy=None) -> float:
    """The survival integral without its constant."""
    return _integrals(model, x, policy).survival_integral(t / abs(x) ** model.alpha)[0]


def paired_survival(model: StableModel, g: TestFunction, t: float, constant: float,
                    panels_per_unit: int = 2) -> float:
    """int P^x(tau_0 > t) g(x) dx by x-space quadrature of the survival function."""
    total = 0.0
    for atom in g.atoms:
        sgn = 1.0 if atom.kind == RIGHT else -1.0
        extent = 1.0
        while atom.s_decay * extent * math.log(extent + math.e) < 40.0:
            extent *= 1.25
        # survival ~ |x|^{alpha-1} at the origin: geometric panels there
        edges = np.concatenate([[0.0], np.geomspace(1e-10, 1.0, 21),
                                np.linspace(1.0, extent, int(panels_per_unit * extent) + 2)[1:]])
        x, w = gauss_legendre_panels(edges, 10)
        vals = np.array([_unit_survival(model, sgn * xi, t) for xi in x])
        total += float(np.sum(w * vals * atom(sgn * x)))
    return constant * total


def survival_quotient_route(g: TestFunction, model: StableModel, t) -> np.ndarray:
    """int P^x(tau_0 > t) g(x) dx from the boundary values of phi_2 / phi_0 (no eigenfunctions)."""
    from .spectral import quotient_survival
    return quotient_survival(g, model, t)


def laplace_residual(model: StableModel, x: float, lam: float, constant: float) -> float:
    """|1 - lam int_0^inf e^{-lam t} P^x(tau_0 > t) dt - E^x e^{-lam tau_0}| with the
    survival normalized by ``constant``."""
    from .resolvent import hitting_laplace
    lo, hi = math.log(1e-12), math.log(80.0 / lam)
    u, w = gauss_legendre_panels(np.linspace(lo, hi, int(3 * (hi - lo)) + 1), 12)
    tt = np.exp(u)
    ints = _integrals(model, x, None)
    a = model.alpha
    s = np.array([ints.survival_integral(ti / abs(x) ** a)[0] for ti in tt])
    # the stretch [0, 1e-12] carries survival ~ 1
    lap = lam * (float(np.sum(w * tt * np.exp(-lam * tt) * constant * s)) + 1e-12)
    return abs(1.0 - lap - hitting_laplace(model, lam, x))


def calibrate_constant(model: StableModel, xs=(0.5, 1.0, 2.0), t_quotient: float = 1.0,
                       g: TestFunction | None = None, tol: float = 1e-6,
                       write: bool = False) -> dict:
    """Decide which normalizing constant is right by three independent criteria:
    P^x(tau_0 > t) -> 1 as t -> 0, agreement with the quotient route, and the Laplace
    transform of the survival against u_lambda(-x) / u_lambda(0)."""
    g = g or explog("+", 1.0)
    cands = constant_candidates(model)
    unit = {x: _unit_survival(model, x, 1e-8 * abs(x) ** model.alpha) for x in xs}
    quot = float(survival_quotient_route(g, model, t_quotient)[0])
    paired_unit = paired_survival(model, g, t_quotient, 1.0)
    report = {"alpha": model.alpha, "rho": model.rho, "xs": list(xs), "tolerance": tol,
              "candidates": {}}
    passing = []
    for name, c in cands.items():
        small_t = max(abs(c * v - 1.0) for v in unit.values())
        q = abs(c * paired_unit - quot) / abs(quot)
        lap = max(laplace_residual(model, x, 1.0, c) for x in xs)
        ok = small_t < tol and q < tol and lap < tol
        report["candidates"][name] = {"constant": c, "small_t_residual": small_t,
                                      "quotient_residual": q, "laplace_residual": lap,
                                      "passes": ok}
        if ok:
            passing.append(name)
    if len(passing) != 1:
        raise AmbiguousCalibrationError(f"calibration outcome {passing} is not unique: {report}")
    report["selected"] = passing[0]
    body = json.dumps(report, sort_keys=True).encode()
    report["sha256"] = hashlib.sha256(body).hexdigest()
    if write:
        FIXTURE_DIR.mkdir(exist_ok=True)
        CALIBRATION_FILE.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


__all__ = [
    "SurvivalQuery", "SurvivalCurve", "survival", "survival_with_error", "survival_direct",
    "hitting_density", "hitting_density_with_error", "survival_curve", "constant_candidates",
    "resolve_constant", "AmbiguousCalibrationError", "NonConvergenceError",
    "CALIBRATED", "CANDIDATE_1", "CANDIDATE_ASIN", "CONSTANT_MODES", "calibrate_constant",
    "paired_survival", "survival_quotient_route", "laplace_residual",
]
