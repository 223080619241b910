"""Superexponentially decaying test functions and their Laplace transforms.

An atom is ``a(x) = exp(-s x log(x + e))`` on ``x >= 0`` (right) or its mirror
``a(-x)`` on ``x <= 0`` (left). Both extend analytically to the open half-plane
on their side, which is what allows the rotated contours used elsewhere.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .model import StableModel
from .quadrature import gauss_legendre_panels

E = math.e
RIGHT = "exp-log-right"
LEFT = "exp-log-left"
SUM = "sum"


class SectorError(ValueError):
    """Evaluation point outside the analyticity sectors of a test function."""


def atom_value(s: float, w):
    """exp(-s w log(w + e)) with the principal logarithm."""
    w = np.asarray(w)
    return np.exp(-s * w * np.log(w + E))


# --- Laplace transform of a right atom --------------------------------------------------

_N_FFT = 256
_RADIUS = 1.5
_N_TERMS = 48


@lru_cache(maxsize=64)
def _taylor(s: float) -> np.ndarray:
    """Taylor coefficients of the atom at 0 via FFT on a circle inside |w| < e."""
    w = _RADIUS * np.exp(2j * np.pi * np.arange(_N_FFT) / _N_FFT)
    c = np.fft.fft(atom_value(s, w)) / _N_FFT
    return (c[:_N_TERMS] / _RADIUS ** np.arange(_N_TERMS)).real


def asymptotic_radius(s: float) -> float:
    """|z| beyond which the Watson series is accurate to about machine precision."""
    return max(24.0, 12.0 * s)


def _laplace_series(s: float, z: np.ndarray) -> np.ndarray:
    c = _taylor(s)
    fact = np.cumprod(np.concatenate([[1.0], np.arange(1, _N_TERMS)]))
    inv = 1.0 / z
    # Horner in 1/z over the coefficients k! c_k
    out = np.zeros_like(z)
    for k in range(_N_TERMS - 1, -1, -1):
        out = (out + fact[k] * c[k]) * inv
    return out


_PHI_GRID = np.linspace(-1.3, 1.3, 27)
_U_PROBE = np.concatenate([np.linspace(0.0, 10.0, 81)[1:], np.geomspace(10.5, 400.0, 80)])


def _log_magnitude(s: float, z: complex, phi: np.ndarray, u: np.ndarray) -> np.ndarray:
    w = u[None, :] * np.exp(1j * phi)[:, None]
    return -s * (w * np.log(w + E)).real - (z * w).real


def _ray_setup(s: float, z: complex):
    m = _log_magnitude(s, z, _PHI_GRID, _U_PROBE)
    peak = np.maximum(m.max(axis=1), 0.0)
    decayed = m[:, -1] < peak - 40.0
    score = np.where(decayed, peak, np.inf)
    i = int(np.argmin(score))
    phi = float(_PHI_GRID[i])
    row = m[i]
    ipk = int(np.argmax(row))
    beyond = np.nonzero(row[ipk:] < row[ipk] - 40.0)[0]
    u_end = float(_U_PROBE[ipk + beyond[0]]) if len(beyond) else float(_U_PROBE[-1])
    return phi, u_end


def _laplace_ray(s: float, z: complex) -> complex:
    phi, u_end = _ray_setup(s, z)
    ephi = np.exp(1j * phi)
    freq = abs((z * ephi).imag) + s * (1.0 + math.log1p(u_end)) + 1.0
    width = min(0.5, 2.5 / freq)
    n_panels = max(4, int(math.ceil(u_end / width)))
    u, wts = gauss_legendre_panels(np.linspace(0.0, u_end, n_panels + 1), 20)
    w = u * ephi
    vals = np.exp(-s * w * np.log(w + E) - z * w)
    return complex(ephi * np.dot(wts, vals))


_SMALL_Z = 0.5
_N_MOMENTS = 40


@lru_cache(maxsize=64)
def _scaled_moments(s: float) -> np.ndarray:
    """(-1)^k m_k / k! for the atom's moments m_k = int x^k a(x) dx."""
    x_end = 1.0
    while s * x_end * math.log(x_end + E) < 745.0:
        x_end *= 1.5
    x, w = gauss_legendre_panels(np.linspace(0.0, x_end, int(8 * x_end) + 8), 24)
    ax = w * atom_value(s, x).real
    k = np.arange(_N_MOMENTS)
    logfact = np.cumsum(np.log(np.maximum(k, 1)))
    # x^k / k! in logs to avoid overflow
    terms = np.exp(np.outer(k, np.log(np.maximum(x, 1e-300))) - logfact[:, None])
    terms[0] = 1.0
    return (-1.0) ** k * (terms @ ax)


def _laplace_small(s: float, z: np.ndarray) -> np.ndarray:
    c = _scaled_moments(s)
    out = np.zeros_like(z)
    for k in range(_N_MOMENTS - 1, -1, -1):
        out = out * z + c[k]
    return out


def laplace_atom(s: float, z) -> np.ndarray:
    """int_0^inf exp(-s x log(x+e)) exp(-z x) dx for complex z (entire in z)."""
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.empty_like(flat)
    mag = np.abs(flat)
    big = mag >= asymptotic_radius(s)
    small = mag < _SMALL_Z
    if np.any(big):
        out[big] = _laplace_series(s, flat[big])
    if np.any(small):
        out[small] = _laplace_small(s, flat[small])
    for i in np.nonzero(~big & ~small)[0]:
        out[i] = _laplace_ray(s, complex(flat[i]))
    # exact conjugate symmetry for real arguments
    real = flat.imag == 0
    out[real] = out[real].real
    return out.reshape(z.shape)


# --- test functions -----------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    kind: str
    s_decay: float = 1.0
    components: tuple = field(default=())

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if self.kind in (RIGHT, LEFT):
            if not self.s_decay > 0:
                raise ValueError("s_decay must be positive")
        elif self.kind == SUM:
            if not self.components:
                raise ValueError("a sum needs at least one component")
        else:
            raise ValueError(f"unknown test function kind {self.kind!r}")

    @property
    def atoms(self) -> tuple:
        if self.kind == SUM:
            return tuple(a for c in self.components for a in c.atoms)
        return (self,)

    @property
    def decay_delta(self) -> float:
        """delta in |g(z)| = O(|z|^{-delta |z|}) on closed subsectors (s times cos of the angle)."""
        return min(a.s_decay for a in self.atoms)

    def mirrored(self) -> "TestFunction":
        """x -> g(-x)."""
        if self.kind == SUM:
            return TestFunction(SUM, components=tuple(c.mirrored() for c in self.components))
        return TestFunction(LEFT if self.kind == RIGHT else RIGHT, self.s_decay)

    def __call__(self, z):
        return evaluate(self, z)

    def __str__(self) -> str:
        if self.kind == SUM:
            return "+".join(str(c) for c in self.components)
        side = "+" if self.kind == RIGHT else "-"
        return f"explog(side={side},s={self.s_decay:g})"


def explog(side: str = "+", s: float = 1.0) -> TestFunction:
    return TestFunction(RIGHT if side in ("+", "plus", "right") else LEFT, float(s))


def sum_of(*parts: TestFunction) -> TestFunction:
    return TestFunction(SUM, components=tuple(parts))


_ATOM_RE = re.compile(r"explog\(\s*side\s*=\s*([+-])\s*,\s*s\s*=\s*([0-9.eE+-]+)\s*\)")


def parse_test_function(text: str) -> TestFunction:
    """Parse ``explog(side=+,s=1)`` or a ``+``-separated sum of such atoms."""
    atoms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _ATOM_RE.match(text, pos)
        if not m:
            raise ValueError(f"cannot parse test function near {text[pos:]!r}")
        atoms.append(explog(m.group(1), float(m.group(2))))
        pos = m.end()
        while pos < len(text) and text[pos] in " +":
            pos += 1
    if not atoms:
        raise ValueError("empty test function")
    return atoms[0] if len(atoms) == 1 else sum_of(*atoms)


def evaluate(g: TestFunction, z):
    """Value of g (or its analytic extension) at real or sector points."""
    z = np.asarray(z)
    if g.kind == SUM:
        return sum(evaluate(c, z) for c in g.components)
    if np.iscomplexobj(z):
        bad = (z.real == 0) & (z.imag != 0)
        if np.any(bad):
            raise SectorError("test functions are not defined on the imaginary axis")
        zz = z
    else:
        zz = z.astype(float)
    sgn = 1.0 if g.kind == RIGHT else -1.0
    inside = (sgn * zz.real) >= 0
    w = np.where(inside, sgn * zz, 0.0)
    val = np.where(inside, atom_value(g.s_decay, w), 0.0)
    if not np.iscomplexobj(z):
        val = val.real
    return val[()] if val.ndim == 0 else val


def laplace(g: TestFunction, z):
    """Two-sided Laplace transform int g(x) e^{-z x} dx at complex z."""
    z = np.asarray(z, dtype=complex)
    total = np.zeros_like(z)
    for a in g.atoms:
        total = total + laplace_atom(a.s_decay, z if a.kind == RIGHT else -z)
    return total[()] if total.ndim == 0 else total


# --- ray-restricted transforms -----------------------------------------------------------

class RayLaplace:
    """L g(r * d) for r > 0 along a fixed direction d, with a piecewise Chebyshev
    interpolant in log r on the range where direct evaluation is costly.
    """

    _DEG = 24
    _PANEL = 0.5

    def __init__(self, g: TestFunction, direction: complex, r_min: float = 1e-3):
        self.g = g
        self.direction = complex(direction)
        self.r_min = r_min
        self.r_max = max(asymptotic_radius(a.s_decay) for a in g.atoms)
        lo, hi = math.log(r_min), math.log(self.r_max)
        n = int(math.ceil((hi - lo) / self._PANEL))
        self._edges = np.linspace(lo, hi, n + 1)
        k = np.arange(self._DEG)
        cheb = np.cos(np.pi * (k + 0.5) / self._DEG)  # first-kind nodes on [-1, 1]
        c = 0.5 * (self._edges[1:] + self._edges[:-1])
        h = 0.5 * (self._edges[1:] - self._edges[:-1])
        u = (c[:, None] + h[:, None] * cheb[None, :])
        vals = laplace(g, np.exp(u) * self.direction)
        # Chebyshev coefficients per panel
        T = np.cos(np.outer(np.arccos(cheb), k))
        self._coef = (2.0 / self._DEG) * vals @ T
        self._coef[:, 0] *= 0.5
        self._c, self._h = c, h

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        out = np.empty(flat.shape, complex)
        mid = (flat >= self.r_min) & (flat < self.r_max)
        rest = ~mid
        if np.any(rest):
            out[rest] = laplace(self.g, flat[rest] * self.direction)
        if np.any(mid):
            u = np.log(flat[mid])
            idx = np.clip(np.searchsorted(self._edges, u) - 1, 0, len(self._c) - 1)
            x = (u - self._c[idx]) / self._h[idx]
            # Clenshaw recurrence, vectorized over points
            coef = self._coef[idx]
            b1 = np.zeros(len(x), complex)
            b2 = np.zeros(len(x), complex)
            for j in range(self._DEG - 1, 0, -1):
                b1, b2 = 2 * x * b1 - b2 + coef[:, j], b1
            out[mid] = x * b1 - b2 + coef[:, 0]
        return out.reshape(r.shape)


@dataclass
class RayTransformPair:
    """h_0..h_3 for a pair (f, g): real parts of rotated Laplace transforms."""

    f: TestFunction
    g: TestFunction
    model: StableModel
    lf: RayLaplace = field(repr=False, default=None)
    lg: RayLaplace = field(repr=False, default=None)

    def __post_init__(self):
        th = self.model.theta
        rot = complex(math.cos(th), math.sin(th))
        if self.lf is None:
            self.lf = RayLaplace(self.f, -1j * rot)
        if self.lg is None:
            self.lg = RayLaplace(self.g, 1j * rot)
        self._rot = rot

    @property
    def h0(self) -> float:
        return math.cos(self.model.theta)

    def transforms(self, r):
        return self.lf(r), self.lg(r)

    def h(self, r) -> np.ndarray:
        """Array of shape (len(r), 4) holding h_0..h_3."""
        r = np.asarray(r, dtype=float)
        a, b = self.transforms(r)
        out = np.empty(r.shape + (4,))
        out[..., 0] = self.h0
        out[..., 1] = (self._rot * a).real
        out[..., 2] = (self._rot * b).real
        out[..., 3] = (self._rot * a * b).real
        return out

    def h1(self, r):
        return self.h(r)[..., 1]

    def h2(self, r):
        return self.h(r)[..., 2]

    def h3(self, r):
        return self.h(r)[..., 3]


def make_hj(f: TestFunction, g: TestFunction, model: StableModel) -> RayTransformPair:
    return RayTransformPair(f, g, model)
