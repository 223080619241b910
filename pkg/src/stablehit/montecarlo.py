"""Monte Carlo estimates of the survival probability P^x(tau_0 > t).

Increments are exact stable draws (Chambers-Mallows-Stuck). The point 0 is replaced by
the interval [-eps, eps], checked on the time grid, and the eps-dependence is removed by
Richardson extrapolation in eps^(alpha - 1). Paths are simulated in fixed-size blocks,
each with its own counter-based stream keyed by (seed, block index), so results do not
depend on how blocks are distributed over workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import StableModel, lk_exponent

BLOCK_SIZE = 8192


class BudgetError(RuntimeError):
    """The requested simulation exceeds the configured step budget."""


@dataclass(frozen=True)
class McConfig:
    model: StableModel
    n_paths: int
    dt: float
    eps_levels: tuple
    horizon: float
    seed: int = 0
    max_increments: int = 5 * 10 ** 9

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_levels)
        object.__setattr__(self, "eps_levels", eps)
        if self.n_paths < 1:
            raise ValueError("n_paths must be positive")
        if not self.dt > 0 or not self.horizon > 0:
            raise ValueError("dt and horizon must be positive")
        if not eps or any(e <= 0 for e in eps):
            raise ValueError("eps_levels must be positive")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_levels must be strictly decreasing")
        if self.dt > eps[-1] ** self.model.alpha * (1 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds eps_min^alpha={eps[-1] ** self.model.alpha:.3g}; "
                             "the grid cannot resolve the smallest interval")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class HitEstimate:
    p_survive: float
    std_err: float
    n_effective: int
    eps_used: float
    extrapolated: bool
    per_level: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.p_survive <= 1.0 and not self.extrapolated:
            raise ValueError("survival estimate outside [0, 1]")
        if self.std_err < 0:
            raise ValueError("std_err must be nonnegative")

    def as_dict(self) -> dict:
        return {"p_survive": self.p_survive, "std_err": self.std_err,
                "n_effective": self.n_effective, "eps_used": self.eps_used,
                "extrapolated": self.extrapolated,
                "per_level": {f"{k:g}": v for k, v in self.per_level.items()}}


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def _cms(model: StableModel, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Unit-time stable variates from V ~ U(-pi/2, pi/2), W ~ Exp(1).

    In the S1 form with beta tan(pi a / 2) = -tan(a theta) the shift angle is -theta and
    the scale factors cancel, giving E exp(i xi X) = exp(-lk_exponent(xi)).
    """
    a, th = model.alpha, model.theta
    va = a * (v - th)
    return np.sin(va) / np.cos(v) ** (1.0 / a) * (np.cos(v - va) / w) ** ((1.0 - a) / a)


def sample_increments(model: StableModel, dt: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if not dt > 0:
        raise ValueError("dt must be positive")
    v = rng.uniform(-math.pi / 2, math.pi / 2, n)
    w = rng.standard_exponential(n)
    return dt ** (1.0 / model.alpha) * _cms(model, v, w)


def sample_increment(model: StableModel, dt: float, rng: np.random.Generator) -> float:
    return float(sample_increments(model, dt, 1, rng)[0])


def _simulate_block(args) -> np.ndarray:
    """Survival indicators, shape (n, levels), for one block of paths."""
    model, x, n_steps, dt, eps, seed, block, n = args
    rng = block_rng(seed, block)
    pos = np.full(n, float(x))
    alive = np.ones((n, len(eps)), bool)
    eps_arr = np.asarray(eps)
    smallest = eps_arr[-1]
    active = np.abs(pos) > smallest
    alive &= (np.abs(pos)[:, None] > eps_arr[None, :])
    for _ in range(n_steps):
        # draws for every path keep each path's stream independent of the others' fate
        step = sample_increments(model, dt, n, rng)
        if not active.any():
            continue
        pos += step
        hit = np.abs(pos)[:, None] <= eps_arr[None, :]
        alive &= ~hit
        active = alive[:, -1]
    return alive


def _pairwise_sum(parts: list) -> np.ndarray:
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def simulate_indicators(cfg: McConfig, x: float, t: float, workers: int | None = None) -> np.ndarray:
    if x == 0:
        raise ValueError("x must be non-zero")
    if not 0 < t <= cfg.horizon * (1 + 1e-12):
        raise ValueError("t must lie in (0, horizon]")
    n_steps = int(round(t / cfg.dt))
    if abs(n_steps * cfg.dt - t) > 1e-9 * t:
        raise ValueError("t must be a multiple of dt")
    if n_steps * cfg.n_paths > cfg.max_increments:
        raise BudgetError("simulation budget exhausted: reduce paths or refine the time step")
    blocks = []
    left = cfg.n_paths
    b = 0
    while left > 0:
        n = min(BLOCK_SIZE, left)
        blocks.append((cfg.model, x, n_steps, cfg.dt, cfg.eps_levels, cfg.seed, b, n))
        left -= n
        b += 1
    workers = workers or int(os.environ.get("STABLEHIT_THREADS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_simulate_block, blocks))
    else:
        out = [_simulate_block(a) for a in blocks]
    return np.concatenate(out, axis=0)


def richardson_weights(eps_levels, alpha: float) -> np.ndarray:
    """Weights c with sum c_k S(eps_k) = S(0) when S(eps) = S(0) + sum_j a_j eps^{j (alpha - 1)}."""
    e = np.asarray(eps_levels, float)
    m = len(e)
    A = np.array([[ek ** (j * (alpha - 1.0)) for ek in e] for j in range(m)])
    rhs = np.zeros(m)
    rhs[0] = 1.0
    return np.linalg.solve(A, rhs)


def estimate_survival(cfg: McConfig, x: float, t: float, workers: int | None = None) -> HitEstimate:
    ind = simulate_indicators(cfg, x, t, workers).astype(float)
    n = ind.shape[0]
    per_level = {}
    for k, e in enumerate(cfg.eps_levels):
        parts = [ind[i:i + BLOCK_SIZE, k].sum() for i in range(0, n, BLOCK_SIZE)]
        p = float(_pairwise_sum(parts)) / n
        per_level[e] = {"p_survive": p, "std_err": math.sqrt(max(p * (1 - p), 0.0) / n)}
    if len(cfg.eps_levels) == 1:
        e = cfg.eps_levels[0]
        return HitEstimate(per_level[e]["p_survive"], per_level[e]["std_err"], n, e, False, per_level)
    c = richardson_weights(cfg.eps_levels, cfg.model.alpha)
    z = ind @ c
    parts = [z[i:i + BLOCK_SIZE].sum() for i in range(0, n, BLOCK_SIZE)]
    mean = float(_pairwise_sum(parts)) / n
    se = float(np.std(z, ddof=1)) / math.sqrt(n)
    return HitEstimate(mean, se, n, 0.0, True, per_level)


def compare_with_quadrature(cfg: McConfig, x: float, t: float, bias_budget: float = 0.02,
                            workers: int | None = None) -> dict:
    from .hitting import SurvivalQuery, survival
    est = estimate_survival(cfg, x, t, workers)
    ref = survival(SurvivalQuery(cfg.model, x, t))
    diff = est.p_survive - ref
    z = diff / est.std_err if est.std_err > 0 else math.inf
    return {"estimate": est.as_dict(), "quadrature": ref, "difference": diff, "z_score": z,
            "within_budget": abs(diff) <= 3 * est.std_err + bias_budget}


# --- sampler diagnostics ----------------------------------------------------------------------

def sampler_diagnostics(model: StableModel, n: int = 10 ** 6, seed: int = 0,
                        xis=(-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)) -> dict:
    """Empirical checks of unit-time increments: characteristic function against
    exp(-lk_exponent), P(X_1 > 0) against rho, and a Hill estimate of alpha."""
    x = sample_increments(model, 1.0, n, block_rng(seed, 2 ** 32))
    cf = {}
    for xi in xis:
        e = np.exp(1j * xi * x)
        m = complex(e.mean())
        target = complex(np.exp(-lk_exponent(model, xi)))
        se = math.sqrt((float(np.var(e.real)) + float(np.var(e.imag))) / n)
        cf[f"{xi:g}"] = {"empirical": [m.real, m.imag], "target": [target.real, target.imag],
                         "abs_diff": abs(m - target), "std_err": se}
    pos = float(np.mean(x > 0))
    pos_se = math.sqrt(pos * (1 - pos) / n)
    k = max(100, n // 1000)
    tail = np.sort(np.abs(x))[-(k + 1):]
    hill = 1.0 / float(np.mean(np.log(tail[1:] / tail[0])))
    return {"n": n, "cf": cf, "p_positive": pos, "p_positive_se": pos_se, "rho": model.rho,
            "alpha_hill": hill}


__all__ = ["McConfig", "HitEstimate", "BudgetError", "sample_increment", "sample_increments",
           "estimate_survival", "simulate_indicators", "richardson_weights",
           "compare_with_quadrature", "sampler_diagnostics", "block_rng", "BLOCK_SIZE"]
