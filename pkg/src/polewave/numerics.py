"""Quadrature rules, momentum meshes and special functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError

MAX_L = 12
THETA_MAX = np.pi / 4


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    if n < 1:
        raise DomainError("need at least one quadrature node")
    if not a < b:
        raise DomainError(f"invalid interval [{a}, {b}]")
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


@dataclass(frozen=True, eq=False)
class MomentumMesh:
    """Quadrature on ``[0, q_max)`` for momentum integrals.

    ``theta`` is the complex-scaling angle; the solvers evaluate everything
    at ``nodes * exp(-i theta)`` while integrating over the real ``nodes``.
    ``q_max`` is ``inf`` for meshes mapped onto the half line.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scale: float
    theta: float = 0.0
    q_max: float = np.inf
    kind: str = "tangent"

    def __post_init__(self):
        q, w = self.nodes, self.weights
        if q.ndim != 1 or q.shape != w.shape:
            raise DomainError("nodes and weights must be 1-d arrays of equal length")
        if not (q[0] > 0 and np.all(np.diff(q) > 0) and np.all(w > 0)):
            raise DomainError("mesh nodes must be positive, increasing, with positive weights")
        if not 0.0 <= self.theta < THETA_MAX:
            raise DomainError(f"scaling angle {self.theta} rad outside [0, pi/4)")

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def phase(self) -> complex:
        return np.exp(-1j * self.theta)

    @property
    def scaled(self) -> np.ndarray:
        """Complex-scaled momenta ``q exp(-i theta)``."""
        return self.nodes * self.phase

    def with_theta(self, theta: float) -> "MomentumMesh":
        return MomentumMesh(self.nodes, self.weights, self.scale, theta, self.q_max, self.kind)

    def refined(self, factor: int = 2) -> "MomentumMesh":
        """Same mapping with ``factor`` times as many nodes."""
        if self.kind == "tangent":
            return tangent_mapped_mesh(self.n * factor, self.scale, self.theta)
        return rational_mapped_mesh(self.n * factor, self.scale, self.q_max, self.theta)

    def describe(self) -> str:
        top = "inf" if np.isinf(self.q_max) else f"{self.q_max:g}"
        return f"{self.kind}(n={self.n},scale={self.scale:g},qmax={top},theta={np.degrees(self.theta):g}deg)"


def tangent_mapped_mesh(n: int, scale: float, theta: float = 0.0) -> MomentumMesh:
    """Gauss-Legendre nodes mapped to ``[0, inf)`` by ``q = scale tan(pi (1 + x) / 4)``."""
    if n < 8:
        raise DomainError("tangent mesh needs n >= 8")
    if scale <= 0:
        raise DomainError("mesh scale must be positive")
    x, w = gauss_legendre(n)
    arg = 0.25 * np.pi * (1.0 + x)
    q = scale * np.tan(arg)
    jac = 0.25 * np.pi * scale / np.cos(arg) ** 2
    return MomentumMesh(q, w * jac, float(scale), float(theta), np.inf, "tangent")


def rational_mapped_mesh(n: int, scale: float, q_max: float, theta: float = 0.0) -> MomentumMesh:
    """Gauss-Legendre nodes mapped to ``[0, q_max]`` with half of them below ~``scale``.

    Uses ``q = scale (1 + x) / (1 - x + 2 scale / q_max)``.
    """
    if n < 8:
        raise DomainError("mesh needs n >= 8")
    if not 0 < scale < q_max:
        raise DomainError("need 0 < scale < q_max")
    x, w = gauss_legendre(n)
    c = 2.0 * scale / q_max
    den = 1.0 - x + c
    q = scale * (1.0 + x) / den
    jac = scale * (2.0 + c) / den**2
    return MomentumMesh(q, w * jac, float(scale), float(theta), float(q_max), "rational")


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Gauss-Legendre quadrature on ``[0, r_max]`` in fm."""

    nodes: np.ndarray
    weights: np.ndarray

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1] + 0.5 * self.weights[-1])


def radial_grid(r_max: float, n: int) -> RadialGrid:
    r, w = gauss_legendre(n, 0.0, r_max)
    return RadialGrid(r, w)


def legendre_P(L: int, x):
    """Legendre polynomial ``P_L(x)`` by Bonnet's recurrence; ``x`` may be complex."""
    if not 0 <= L <= MAX_L:
        raise DomainError(f"L={L} outside supported range 0..{MAX_L}")
    x = np.asarray(x)
    p_prev = np.ones_like(x, dtype=np.result_type(x, float))
    if L == 0:
        return p_prev if p_prev.ndim else p_prev[()]
    p = x * 1.0
    for l in range(1, L):
        p_prev, p = p, ((2 * l + 1) * x * p - l * p_prev) / (l + 1)
    return p if np.ndim(p) else p[()]


_SERIES_RADIUS = 0.5
_IMAG_GUARD = 700.0


def _sph_j_series(L: int, z: np.ndarray) -> np.ndarray:
    dfact = 1.0
    for k in range(1, 2 * L + 2, 2):
        dfact *= k
    term = np.ones_like(z)
    total = np.ones_like(z)
    mz2 = -0.5 * z * z
    for k in range(1, 16):
        term = term * mz2 / (k * (2 * L + 2 * k + 1))
        total = total + term
    return z**L / dfact * total


def _sph_j_upward(L: int, z: np.ndarray) -> np.ndarray:
    s, c = np.sin(z), np.cos(z)
    j0 = s / z
    if L == 0:
        return j0
    j1 = s / (z * z) - c / z
    for l in range(1, L):
        j0, j1 = j1, (2 * l + 1) / z * j1 - j0
    return j1


def _sph_j_miller(L: int, z: np.ndarray) -> np.ndarray:
    # Downward recurrence from well above L, normalized to the closed forms.
    top = L + 20 + int(np.ceil(np.max(np.abs(z)))) if z.size else L + 20
    j_hi = np.zeros_like(z)
    j = np.full_like(z, 1e-30)
    keep = None
    for l in range(top, 0, -1):
        j_lo = (2 * l + 1) / z * j - j_hi
        j_hi, j = j, j_lo
        if l - 1 == L:
            keep = j.copy()
        big = np.abs(j) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            j, j_hi = j * scale, j_hi * scale
            if keep is not None:
                keep = keep * scale
    if keep is None:  # L == top is impossible; L == 0 handled here
        keep = j.copy()
    # j holds the unnormalized j_0, j_hi the unnormalized j_1
    s, c = np.sin(z), np.cos(z)
    exact0 = s / z
    exact1 = s / (z * z) - c / z
    use0 = np.abs(exact0) >= np.abs(exact1)
    norm = np.where(use0, exact0 / j, exact1 / j_hi)
    return keep * norm


def sph_bessel_j(L: int, z):
    """Spherical Bessel function ``j_L(z)`` for complex ``z``.

    Power series near the origin, upward recurrence for ``|z| >= L`` and
    Miller's downward recurrence in between.
    """
    if not 0 <= L <= MAX_L:
        raise DomainError(f"L={L} outside supported range 0..{MAX_L}")
    z_in = np.asarray(z)
    z = z_in.astype(complex).ravel()
    if z.size and np.max(np.abs(z.imag)) > _IMAG_GUARD:
        raise DomainError("|Im z| too large for spherical Bessel evaluation")
    out = np.empty_like(z)
    az = np.abs(z)
    series = az < _SERIES_RADIUS
    upward = ~series & (az >= L)
    miller = ~series & ~upward
    if np.any(series):
        out[series] = _sph_j_series(L, z[series])
    if np.any(upward):
        out[upward] = _sph_j_upward(L, z[upward])
    if np.any(miller):
        out[miller] = _sph_j_miller(L, z[miller])
    out = out.reshape(z_in.shape)
    if not np.iscomplexobj(z_in):
        out = out.real
    return out if out.ndim else out[()]


def muller(f, x0: complex, h: complex = 1e-2, tol: float = 1e-8, maxiter: int = 100):
    """Complex root of ``f`` by Muller's method started at ``x0 - h, x0 + h, x0``.

    Returns ``(root, n_iterations)``. Stops when the step falls below ``tol``.
    """
    from .errors import ConvergenceError

    x = [complex(x0) - h, complex(x0) + h, complex(x0)]
    fx = [f(v) for v in x]
    for it in range(1, maxiter + 1):
        x0_, x1, x2 = x
        f0, f1, f2 = fx
        h1, h2 = x1 - x0_, x2 - x1
        d1, d2 = (f1 - f0) / h1, (f2 - f1) / h2
        a = (d2 - d1) / (h2 + h1)
        b = a * h2 + d2
        disc = np.sqrt(b * b - 4.0 * f2 * a)
        den = b + disc if abs(b + disc) >= abs(b - disc) else b - disc
        if den == 0:
            step = h2 if h2 != 0 else h
        else:
            step = -2.0 * f2 / den
        x3 = x2 + step
        if abs(step) < tol:
            return x3, it
        if not np.isfinite(x3):
            break
        x = [x1, x2, x3]
        fx = [f1, f2, f(x3)]
        if fx[-1] == 0:
            return x3, it
    raise ConvergenceError(f"Muller iteration did not converge from {x0}")
