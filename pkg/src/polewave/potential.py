"""Partial-wave interactions ``V_L,jk(E; p', p)`` at complex momenta.

Every model factorizes as ``V_L,jk(E; p', p) = strength(E) * C_jk * S_L(p', p)``
with a channel coupling matrix ``C`` and an energy-independent momentum shape
``S_L``. Momentum-space values are in MeV^-2 so that
``q^2 V_L / (2 pi^2 (E - energy))`` is dimensionless per unit momentum.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .kinematics import HBARC
from .numerics import (
    MAX_L,
    THETA_MAX,
    RadialGrid,
    gauss_legendre,
    legendre_P,
    radial_grid,
    sph_bessel_j,
)


@dataclass(frozen=True)
class EnergyLaw:
    """Linear energy dependence ``v(E) = v0 + v1 (E - E0)`` in MeV."""

    v0: float
    v1: float = 0.0
    E0: complex = 0.0

    def __call__(self, E):
        return self.v0 + self.v1 * (E - self.E0)

    def derivative(self, E):
        return self.v1 + 0.0 * E

    def pinned(self, v1: float, E0: complex) -> "EnergyLaw":
        return EnergyLaw(self.v0, v1, E0)


def v_of_E(law: EnergyLaw, E):
    return law(E)


class Interaction:
    """Base class; subclasses provide ``strength``, ``dstrength`` and ``shape``."""

    couplings = np.ones((1, 1))
    max_L = MAX_L

    @property
    def n_channels(self) -> int:
        return self.couplings.shape[0]

    def strength(self, E):
        raise NotImplementedError

    def dstrength(self, E):
        raise NotImplementedError

    def shape(self, L: int, p_out, p_in, contour: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def check(self, L: int, j: int = 0, k: int = 0):
        if not 0 <= L <= self.max_L:
            raise DomainError(f"{type(self).__name__} does not support L={L}")
        if not (0 <= j < self.n_channels and 0 <= k < self.n_channels):
            raise DomainError(f"channel pair ({j}, {k}) not in a {self.n_channels}-channel model")

    def block(self, L: int, E, p, contour: float = 0.0, shape=None, derivative=False):
        """Full channel-by-momentum matrix of ``V_L`` (or ``dV_L/dE``) at momenta ``p``."""
        S = self.shape(L, p, p, contour) if shape is None else shape
        factor = self.dstrength(E) if derivative else self.strength(E)
        return factor * np.kron(self.couplings, S)


def project_partial_wave(model: Interaction, L: int, j: int, k: int, E, p_out, p_in, theta: float = 0.0):
    """Single matrix element ``V_L,jk(E; p_out, p_in)``."""
    model.check(L, j, k)
    S = model.shape(L, np.atleast_1d(p_out), np.atleast_1d(p_in), theta)
    return complex(model.strength(E) * model.couplings[j, k] * S[0, 0])


def dV_dE_partial_wave(model: Interaction, L: int, j: int, k: int, E, p_out, p_in, theta: float = 0.0):
    model.check(L, j, k)
    S = model.shape(L, np.atleast_1d(p_out), np.atleast_1d(p_in), theta)
    return complex(model.dstrength(E) * model.couplings[j, k] * S[0, 0])


class LocalInteraction(Interaction):
    """Local potential ``V(E; r) = v(E) * profile(r)`` given in coordinate space.

    The partial-wave shape is the Fourier-Bessel integral along the rotated
    radial contour ``r = s exp(i contour)``::

        S_L(p', p) = 4 pi e^{3 i contour} int ds s^2 j_L(p' e^{i contour} s)
                     profile(s e^{i contour}) j_L(p e^{i contour} s)

    For ``p = q exp(-i contour)`` the Bessel arguments are real.
    """

    n_radial_min = 400
    n_radial_max = 20000
    radial_density = 0.8  # nodes per radian of total Bessel phase

    def __init__(self, law: EnergyLaw):
        self.law = law

    def strength(self, E):
        return self.law(E)

    def dstrength(self, E):
        return self.law.derivative(E)

    def profile(self, r):
        raise NotImplementedError

    @property
    def max_contour(self) -> float:
        return THETA_MAX

    def r_cut(self, contour: float) -> float:
        raise NotImplementedError

    def radial_grid_for(self, p_out, p_in, contour: float) -> RadialGrid:
        r_max = self.r_cut(contour)
        phase = (np.max(np.abs(p_out)) + np.max(np.abs(p_in))) * r_max / HBARC
        n = max(self.n_radial_min, int(np.ceil(self.radial_density * phase)) + 100)
        if n > self.n_radial_max:
            raise DomainError(
                f"momenta up to {np.max(np.abs(p_out)):.3g} MeV need {n} radial nodes; "
                "use a mesh with a finite q_max (kind = rational)"
            )
        return radial_grid(r_max, n)

    def shape(self, L, p_out, p_in, contour=0.0, grid: Optional[RadialGrid] = None):
        if not 0 <= L <= self.max_L:
            raise DomainError(f"L={L} not supported")
        if not 0 <= contour < self.max_contour:
            raise DomainError(
                f"contour angle {np.degrees(contour):.2f} deg outside the analyticity "
                f"sector [0, {np.degrees(self.max_contour):.2f}) deg of {type(self).__name__}"
            )
        same = p_in is p_out
        p_out = np.atleast_1d(np.asarray(p_out, dtype=complex))
        p_in = p_out if same else np.atleast_1d(np.asarray(p_in, dtype=complex))
        if grid is None:
            grid = self.radial_grid_for(p_out, p_in, contour)
        rot = np.exp(1j * contour)
        s, w = grid.nodes, grid.weights
        j_out = _bessel_table(L, p_out * rot, s)
        j_in = j_out if same else _bessel_table(L, p_in * rot, s)
        f = self.profile(s * rot)
        return 4.0 * np.pi * rot**3 * ((j_out * (w * s * s * f)) @ j_in.T) / HBARC**3


def _bessel_table(L, p, s):
    z = np.outer(p, s) / HBARC
    if np.all(z.imag == 0):
        return sph_bessel_j(L, z.real).astype(complex)
    return sph_bessel_j(L, z)


class WoodsSaxon(LocalInteraction):
    """``v(E) / (1 + exp((r - R) / a))``."""

    def __init__(self, law: EnergyLaw = EnergyLaw(-35.0), R: float = 3.6, a: float = 0.5):
        super().__init__(law)
        self.R = R
        self.a = a

    def profile(self, r):
        u = (np.asarray(r, dtype=complex) - self.R) / self.a
        pos = u.real > 0
        e = np.exp(np.where(pos, -u, u))
        return np.where(pos, e / (1.0 + e), 1.0 / (1.0 + e))

    @property
    def max_contour(self) -> float:
        # first pole of the Fermi function sits at r = R + i pi a
        return float(np.arctan(np.pi * self.a / self.R))

    def r_cut(self, contour):
        return (self.R + 36.0 * self.a) / np.cos(contour)


class DoubleGaussian(LocalInteraction):
    """``v(E) (2 exp(-r^2/b1^2) - exp(-r^2/b2^2))``: attractive core plus barrier."""

    def __init__(self, law: EnergyLaw = EnergyLaw(-50.0), b1: float = 2.5, b2: float = 5.0):
        super().__init__(law)
        self.b1 = b1
        self.b2 = b2

    def profile(self, r):
        r2 = np.asarray(r, dtype=complex) ** 2
        return 2.0 * np.exp(-r2 / self.b1**2) - np.exp(-r2 / self.b2**2)

    def r_cut(self, contour):
        return max(self.b1, self.b2) * np.sqrt(36.0 / np.cos(2.0 * contour))


class CoupledGaussian(LocalInteraction):
    """``v(E) C_jk exp(-r^2/b^2)`` with ``C = [[1, x], [x, 0]]``."""

    def __init__(self, law: EnergyLaw = EnergyLaw(-650.0), b: float = 0.5, x: float = 0.5):
        super().__init__(law)
        self.b = b
        self.x = x
        self.couplings = np.array([[1.0, x], [x, 0.0]])

    def profile(self, r):
        return np.exp(-(np.asarray(r, dtype=complex) ** 2) / self.b**2)

    def r_cut(self, contour):
        return self.b * np.sqrt(36.0 / np.cos(2.0 * contour))


_ANGULAR_NODES = 64
# Bernstein-ellipse parameter below which the 64-point angular rule is
# replaced by Legendre functions of the second kind (rule error ~ rho^-128).
_RHO_SWITCH = 1.35


def legendre_Q(L: int, z):
    """Legendre function of the second kind ``Q_L(z)`` for ``z`` off ``[-1, 1]``.

    Forward recurrence; intended for ``z`` near the cut, where it is stable.
    """
    z = np.asarray(z, dtype=complex)
    q_prev = 0.5 * np.log((z + 1.0) / (z - 1.0))
    if L == 0:
        return q_prev
    q = z * q_prev - 1.0
    for l in range(1, L):
        q_prev, q = q, ((2 * l + 1) * z * q - l * q_prev) / (l + 1)
    return q


def _bernstein_rho(z):
    w = z + np.sqrt(z - 1.0) * np.sqrt(z + 1.0)
    return np.maximum(np.abs(w), 1.0 / np.maximum(np.abs(w), 1e-300))


class YukawaFormFactor(Interaction):
    """Momentum-space ``beta * 4 pi / (Q^2 + mu^2) * cutoff^2 / (Q^2 + cutoff^2)``.

    ``beta`` is dimensionless and ``mu``/``cutoff`` are in MeV, so the result is
    in MeV^-2 directly. ``cutoff=None`` gives the bare Yukawa interaction.
    """

    def __init__(self, beta: float = -2.0, mu: float = 450.0, cutoff: Optional[float] = 1000.0):
        self.beta = beta
        self.mu = mu
        self.cutoff = cutoff
        if cutoff is not None and cutoff == mu:
            raise DomainError("form-factor cutoff must differ from the Yukawa mass")

    def strength(self, E):
        return self.beta + 0.0 * E

    def dstrength(self, E):
        return 0.0 * E

    def momentum_shape(self, Q2):
        """Angle-unprojected shape as a function of squared momentum transfer."""
        out = 4.0 * np.pi / (Q2 + self.mu**2)
        if self.cutoff is not None:
            out = out * self.cutoff**2 / (Q2 + self.cutoff**2)
        return out

    def shape(self, L, p_out, p_in, contour=0.0):
        if not 0 <= L <= self.max_L:
            raise DomainError(f"L={L} not supported")
        a = np.atleast_1d(np.asarray(p_out, dtype=complex))[:, None]
        b = np.atleast_1d(np.asarray(p_in, dtype=complex))[None, :]
        x, w = gauss_legendre(_ANGULAR_NODES)
        A = a * a + b * b
        B = 2.0 * a * b
        Q2 = A[..., None] - B[..., None] * x
        out = 0.5 * np.sum(w * legendre_P(L, x) * self.momentum_shape(Q2), axis=-1)

        # near-singular entries: closed form via Q_L
        masses = [self.mu] if self.cutoff is None else [self.mu, self.cutoff]
        with np.errstate(divide="ignore", invalid="ignore"):
            zs = [(A + m * m) / B for m in masses]
            near = np.zeros(out.shape, dtype=bool)
            for z in zs:
                near |= np.isfinite(z) & (_bernstein_rho(z) < _RHO_SWITCH)
        if np.any(near):
            Bn = np.broadcast_to(B, out.shape)[near]
            ql = [legendre_Q(L, np.broadcast_to(z, out.shape)[near]) for z in zs]
            if self.cutoff is None:
                exact = 4.0 * np.pi * ql[0] / Bn
            else:
                lam2, mu2 = self.cutoff**2, self.mu**2
                exact = 4.0 * np.pi * lam2 / (lam2 - mu2) * (ql[0] - ql[1]) / Bn
            out[near] = exact
        return out
