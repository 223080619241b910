"""Stable process parameters and the characteristic exponent."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """A model parameter lies outside its admissible range."""


@dataclass(frozen=True)
class StableModel:
    """Validated parameter bundle for a strictly alpha-stable process.

    ``theta`` is the rotation angle of the exponent: ``psi(r e^{i theta}) = r^alpha``.
    The process satisfies ``E exp(i xi X_t) = exp(-t psi(-xi))``, so that
    ``P(X_1 > 0) = rho``. ``sim_beta`` and ``sim_sigma`` describe the same law in the usual
    ``exp(-sigma^a |xi|^a (1 - i beta tan(pi a / 2) sign xi))`` parametrization.
    """

    alpha: float
    rho: float
    theta: float
    sim_beta: float
    sim_sigma: float

    @property
    def theta_max(self) -> float:
        return math.pi / self.alpha - math.pi / 2

    @property
    def p_positive(self) -> float:
        """P(X_1 > 0), which equals rho."""
        return 0.5 - self.theta / math.pi

    def mirrored(self) -> "StableModel":
        """The dual process (-X), i.e. theta -> -theta."""
        return make_model(self.alpha, 1.0 - self.rho)


def make_model(alpha: float, rho: float) -> StableModel:
    alpha = float(alpha)
    rho = float(rho)
    if not (1.0 < alpha < 2.0):
        raise ParameterError(f"alpha must satisfy 1 < alpha < 2, got alpha={alpha}")
    lo, hi = 1.0 - 1.0 / alpha, 1.0 / alpha
    # tolerate rounding when rho is given as a decimal for a boundary value
    slack = 1e-12
    if rho < lo - slack:
        raise ParameterError(f"rho must satisfy rho >= 1 - 1/alpha = {lo:.12g}, got rho={rho}")
    if rho > hi + slack:
        raise ParameterError(f"rho must satisfy rho <= 1/alpha = {hi:.12g}, got rho={rho}")
    rho = min(max(rho, lo), hi)
    theta = (1.0 - 2.0 * rho) * math.pi / 2.0
    sim_beta = -math.tan(alpha * theta) / math.tan(alpha * math.pi / 2.0)
    sim_beta = min(max(sim_beta, -1.0), 1.0)
    sim_sigma = math.cos(alpha * theta) ** (1.0 / alpha)
    return StableModel(alpha=alpha, rho=rho, theta=theta, sim_beta=sim_beta, sim_sigma=sim_sigma)


def model_from_theta(alpha: float, theta: float) -> StableModel:
    """Build a model from the asymmetry angle instead of rho."""
    return make_model(alpha, 0.5 - theta / math.pi)


def psi(model: StableModel, xi):
    """The exponent psi, holomorphic off the imaginary axis.

    ``E exp(-i xi X_t) = exp(-t psi(xi))`` for real ``xi``.
    """
    xi = np.asarray(xi, dtype=complex)
    re = xi.real
    if np.any(re == 0.0):
        raise ValueError("psi is not defined on the imaginary axis (re(xi) = 0)")
    a, th = model.alpha, model.theta
    out = np.where(
        re > 0,
        (np.exp(-1j * th) * xi) ** a,
        (-np.exp(1j * th) * xi) ** a,
    )
    return out[()] if out.ndim == 0 else out


def psi_real_axis(model: StableModel, xi):
    """``psi`` on the real line via |xi|^a e^{-/+ i a theta}; exact Hermitian symmetry."""
    xi = np.asarray(xi, dtype=float)
    ph = np.where(xi >= 0, -1.0, 1.0) * model.alpha * model.theta
    out = np.abs(xi) ** model.alpha * np.exp(1j * ph)
    return out[()] if out.ndim == 0 else out


def lk_exponent(model: StableModel, xi):
    """(k|xi|)^a (1 - i tan((2 rho - 1) a pi / 2) sign xi) with k^a = cos(a theta).

    This is the exponent of the process itself, ``E exp(i xi X_t) = exp(-t lk_exponent(xi))``,
    and coincides with ``psi(-xi)``.
    """
    xi = np.asarray(xi, dtype=float)
    a = model.alpha
    skew = math.tan((2.0 * model.rho - 1.0) * a * math.pi / 2.0)
    out = math.cos(a * model.theta) * np.abs(xi) ** a * (1.0 - 1j * skew * np.sign(xi))
    return out[()] if out.ndim == 0 else out
