"""A fast identity suite: every check compares two independent computations of the
same number and records the residual next to its threshold."""

from __future__ import annotations

import json

import numpy as np

from .eigen import MINUS, PLUS, EigenEvaluator, f_eigen, g_fourier_closed, g_fourier_numeric
from .hitting import (CALIBRATION_FILE, SurvivalQuery, hitting_density, laplace_residual,
                      resolve_constant, survival)
from .model import StableModel, model_from_theta, psi
from .resolvent import u_lambda_zero, u_lambda_zero_quadrature
from .testfn import RayTransformPair, explog
from . import spectral as sp


def _check(name: str, residual: float, threshold: float) -> dict:
    return {"name": name, "residual": float(residual), "threshold": threshold,
            "passed": bool(residual <= threshold)}


def run_selftest(model: StableModel) -> dict:
    a, th = model.alpha, model.theta
    checks = []

    # exponent invariants
    r = np.array([0.3, 1.0, 7.0])
    checks.append(_check("psi real on the rotated ray",
                         float(np.max(np.abs(psi(model, r * np.exp(1j * th)).imag))), 1e-12))

    # closed-form kernels
    worst = 0.0
    for lam in (0.1, 1.0, 10.0):
        c = u_lambda_zero(model, lam)
        worst = max(worst, abs(u_lambda_zero_quadrature(model, lam) - c) / c)
    checks.append(_check("u_lambda(0) closed form", worst, 1e-8))

    pair = RayTransformPair(explog("+", 1.0), explog("-", 1.0), model)
    worst = 0.0
    for lam in (0.5, 1.0, 5.0):
        ray = sp.phi_ray_all(pair, model, lam).value
        four = sp.phi_fourier_all(pair, model, lam).value
        worst = max(worst, float(np.max(np.abs(np.real(ray) - four) / np.abs(four))))
        worst = max(worst, abs(ray[0].real - sp.phi0_closed(model, lam).real) / ray[0].real)
    checks.append(_check("phi_j Fourier route vs ray route", worst, 1e-6))

    # Fourier transform of G
    e = EigenEvaluator(model, PLUS)
    worst = 0.0
    for xi in (-1.0, 0.5, 2.0):
        c = complex(g_fourier_closed(e, xi))
        worst = max(worst, abs(g_fourier_numeric(e, xi) - c) / abs(c))
    checks.append(_check("Fourier transform of G", worst, 1e-6))

    # boundary values on the cut
    worst_id, worst_lim = 0.0, 0.0
    for s in (0.5, 2.0):
        res = sp.identity_residuals(pair, model, s)
        worst_id = max(worst_id, max(v for k, v in res.items() if k != "s"))
        tab = sp.kl_table(pair, model, [s])
        lim = sp.boundary_limit(pair, model, s)
        worst_lim = max(worst_lim, float(np.max(np.abs(lim - tab.boundary_values()[:, 0]))))
    checks.append(_check("cut identities (x-space vs principal values)", worst_id, 1e-5))
    checks.append(_check("boundary limit of phi_j", worst_lim, 1e-5))

    # survival
    small = max(abs(survival(SurvivalQuery(model, x, 1e-6 * abs(x) ** a)) - 1.0) for x in (-1.0, 1.0))
    checks.append(_check("survival at t -> 0", small, 1e-3))
    worst = 0.0
    for x in (-1.0, 1.0):
        for c in (0.5, 2.0):
            p1 = survival(SurvivalQuery(model, x, 1.0))
            p2 = survival(SurvivalQuery(model, c * x, c ** a))
            worst = max(worst, abs(p1 - p2))
    checks.append(_check("survival self-similarity", worst, 1e-8))
    ts = [0.5, 1.0, 2.0, 4.0]
    vals = [survival(SurvivalQuery(model, 1.0, t)) for t in ts]
    checks.append(_check("survival monotone and in [0, 1]",
                         max([max(0.0, b - a_) for a_, b in zip(vals, vals[1:])]
                             + [max(0.0, -v, v - 1.0) for v in vals]), 1e-10))
    h = 1e-4
    fd = -(survival(SurvivalQuery(model, 1.0, 1.0 + h)) - survival(SurvivalQuery(model, 1.0, 1.0 - h))) / (2 * h)
    checks.append(_check("density vs finite difference",
                         abs(fd - hitting_density(SurvivalQuery(model, 1.0, 1.0))), 1e-4))
    c = resolve_constant(model)
    checks.append(_check("Laplace consistency of survival", laplace_residual(model, 1.0, 1.0, c), 1e-4))

    # symmetric reduction
    sym = model_from_theta(a, 0.0)
    xs = np.array([-3.0, -0.2, 0.4, 2.5])
    checks.append(_check("F+ = F- at theta = 0",
                         float(np.max(np.abs(f_eigen(EigenEvaluator(sym, PLUS), xs)
                                             - f_eigen(EigenEvaluator(sym, MINUS), xs)))), 1e-12))

    try:
        selected = json.loads(CALIBRATION_FILE.read_text())["selected"]
    except (OSError, KeyError, ValueError):
        selected = None
    return {"model": {"alpha": a, "rho": model.rho, "theta": th},
            "calibrated_constant": selected,
            "checks": checks,
            "passed": all(ch["passed"] for ch in checks) and selected is not None}


__all__ = ["run_selftest"]
