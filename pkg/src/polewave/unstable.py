"""A bare particle dressed by its two-body decay, and the A-B system built on it.

The bare particle of mass ``m_bare`` couples to a pair of particles of mass
``m_d`` with the form factor ``f(k) = alpha lambda^2 / (k^2 + lambda^2)``.
Loop integrals over the decay momentum run along the rotated contour
``k -> k exp(-i phi)``, which continues them to the second sheet.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DomainError
from .kinematics import Channel
from .numerics import MomentumMesh, muller
from .potential import Interaction

MASS_TOL = 1e-8
FIXED_POINT_SWEEPS = 8
REFINE_TOL = 1e-5  # MeV; spurious roots on the discretized cut move far more under refinement


@dataclass(frozen=True)
class BareCoupling:
    """Bare mass, decay-product mass and form-factor parameters (MeV, MeV^-1/2)."""

    alpha: float = 0.15
    lambda_cut: float = 600.0
    m_bare: float = 600.0
    m_d: float = 138.0

    def __post_init__(self):
        if self.m_bare <= 0 or self.m_d <= 0 or self.lambda_cut <= 0:
            raise DomainError("masses and cutoff must be positive")

    @property
    def decay_open(self) -> bool:
        return 2.0 * self.m_d < self.m_bare

    def f(self, k):
        return self.alpha * self.lambda_cut**2 / (k * k + self.lambda_cut**2)

    def decay_energy(self, k):
        return 2.0 * np.sqrt(k * k + self.m_d**2)


def _loop(mesh: MomentumMesh):
    """Rotated loop momenta and the measure ``w k^2 e^{-3 i phi} / (2 pi^2)``."""
    k = mesh.scaled
    mu = mesh.weights * mesh.nodes**2 * np.exp(-3j * mesh.theta) / (2.0 * np.pi**2)
    return k, mu


def decay_self_energy(bc: BareCoupling, E, mesh: MomentumMesh):
    """Self-energy of the bare particle at rest, ``int d^3k/(2pi)^3 f^2 / (E - 2 sqrt(k^2 + m_d^2))``."""
    k, mu = _loop(mesh)
    E = np.asarray(E, dtype=complex)
    den = E[..., None] - bc.decay_energy(k)
    return np.sum(mu * bc.f(k) ** 2 / den, axis=-1)


def _check_sheet(bc: BareCoupling, E, phi: float):
    # the rotated contour reaches E on the second sheet only if arg k_E^2 > -2 phi
    k2 = (E / 2.0) ** 2 - bc.m_d**2
    if np.real(E) > 2.0 * bc.m_d and np.angle(k2) <= -2.0 * phi:
        raise DomainError(
            f"rotation angle {np.degrees(phi):.1f} deg does not expose E={E:.4g}; "
            f"need more than {np.degrees(-np.angle(k2) / 2):.1f} deg"
        )


def _solve_mass(bc: BareCoupling, mesh: MomentumMesh, guess: Optional[complex]) -> complex:
    def g(m):
        return m - bc.m_bare - complex(decay_self_energy(bc, m, mesh))

    if guess is None:
        # a few fixed-point sweeps keep Muller away from roots hugging the rotated cut
        guess = complex(bc.m_bare)
        for _ in range(FIXED_POINT_SWEEPS):
            guess = bc.m_bare + complex(decay_self_energy(bc, guess, mesh))
    m, _ = muller(g, guess, h=1.0, tol=MASS_TOL, maxiter=100)
    if abs(g(m)) > 1e-6:
        raise ConvergenceError(f"physical-mass residual {abs(g(m)):.2e} MeV")
    return complex(m)


def physical_mass(bc: BareCoupling, mesh: MomentumMesh, guess: Optional[complex] = None,
                  verify: bool = True) -> complex:
    """Pole ``m`` of the dressed propagator: ``m = m_bare + Sigma_d(m)``.

    ``mesh.theta`` is the loop rotation angle. Raises :class:`DomainError`
    when the angle is too small for the root to lie in the continued region,
    or when (``verify``) the root moves under mesh doubling, the signature of
    a root produced by the discretized rotated cut.
    """
    if bc.alpha == 0:
        return complex(bc.m_bare)
    m = _solve_mass(bc, mesh, guess)
    _check_sheet(bc, m, mesh.theta)
    if verify and bc.decay_open:
        m_fine = _solve_mass(bc, mesh.refined(), m)
        if abs(m_fine - m) > REFINE_TOL:
            raise DomainError(
                f"mass {m:.4f} moves by {abs(m_fine - m):.2e} MeV under mesh doubling; "
                f"rotation angle {np.degrees(mesh.theta):.1f} deg is too small for this mesh"
            )
    return m


def self_energy_sigma(bc: BareCoupling, M: float, E3, q, mesh: MomentumMesh):
    """Self-energy of the bare particle moving with momentum ``q`` inside the A-B system.

    Vectorized over ``q``; the loop runs over ``mesh`` (rotated by its angle).
    """
    k, mu = _loop(mesh)
    q = np.asarray(q, dtype=complex)
    q2 = (q * q)[..., None]
    ed = bc.decay_energy(k)
    root = np.sqrt(ed * ed + q2)
    den = E3 - np.sqrt(q2 + M * M) - root
    if np.any(np.abs(den) < 1e-12 * abs(E3)):
        raise DomainError("pinch: loop denominator vanishes on the contour")
    integral = np.sum(mu * (ed / root) * bc.f(k) ** 2 / den, axis=-1)
    return bc.m_bare / np.sqrt(q * q + bc.m_bare**2) * integral


class DressedChannel:
    """A-B channel whose two-body energy contains the A self-energy.

    ``q_independent=True`` replaces ``Sigma(E3; q)`` by ``Sigma(E3; 0)``.
    """

    mode = "SR"

    def __init__(self, base: Channel, coupling: BareCoupling, loop_mesh: MomentumMesh,
                 q_independent: bool = False, label: str = ""):
        if base.mode != "SR" or base.m != coupling.m_bare:
            raise DomainError("dressed channel needs an SR base channel with the bare mass")
        self.base = base
        self.coupling = coupling
        self.loop_mesh = loop_mesh
        self.q_independent = q_independent
        self.label = label
        self._cache: dict = {}
        self._m_phys: Optional[complex] = None

    @property
    def m(self) -> float:
        return self.base.m

    @property
    def M(self) -> float:
        return self.base.M

    @property
    def physical_mass(self) -> complex:
        if self._m_phys is None:
            self._m_phys = physical_mass(self.coupling, self.loop_mesh)
        return self._m_phys

    @property
    def threshold(self) -> complex:
        return self.physical_mass + self.M

    def sigma(self, E3, q) -> np.ndarray:
        q = np.asarray(q, dtype=complex)
        key = (complex(E3), q.shape, hash(q.tobytes()))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.coupling.alpha == 0:
            out = np.zeros(q.shape, dtype=complex)
        elif self.q_independent:
            s0 = self_energy_sigma(self.coupling, self.M, E3, np.zeros(1), self.loop_mesh)[0]
            out = np.full(q.shape, s0, dtype=complex)
        else:
            out = self_energy_sigma(self.coupling, self.M, E3, q, self.loop_mesh)
        if len(self._cache) > 256:
            self._cache.clear()
        self._cache[key] = out
        return out

    def energy(self, E3, q):
        q = np.asarray(q, dtype=complex)
        return np.sqrt(q * q + self.m**2) + self.sigma(E3, q) + np.sqrt(q * q + self.M**2)

    def gap(self, E3, q):
        q = np.asarray(q, dtype=complex)
        # relative to the bare threshold to avoid cancellation
        kin = self.base.kinetic(q)
        return (E3 - self.base.threshold) - kin - self.sigma(E3, q)


def dressed_energy(dc: DressedChannel, E3, q):
    return dc.energy(E3, q)


class SeparableBare(Interaction):
    """Decay-channel interaction ``f(p') f(p) / (E - m_bare)`` in the s wave."""

    max_L = 0

    def __init__(self, coupling: BareCoupling):
        self.coupling = coupling

    def strength(self, E):
        return 1.0 / (E - self.coupling.m_bare)

    def dstrength(self, E):
        return -1.0 / (E - self.coupling.m_bare) ** 2

    def shape(self, L, p_out, p_in, contour=0.0):
        if L != 0:
            raise DomainError("separable bare interaction acts in the s wave only")
        a = self.coupling.f(np.atleast_1d(np.asarray(p_out, dtype=complex)))
        b = self.coupling.f(np.atleast_1d(np.asarray(p_in, dtype=complex)))
        return np.outer(a, b)


def decay_channel(bc: BareCoupling) -> Channel:
    return Channel(bc.m_d, bc.m_d, "SR", label="dd")


def decay_channel_compositeness(bc: BareCoupling, mesh: MomentumMesh, m_phys: Optional[complex] = None):
    """Compositeness of the decay channel in the physical particle.

    Runs the residue pipeline on the separable decay-channel amplitude at its
    pole ``m_phys``. Returns ``(X_d, report)``.
    """
    from .scattering import System
    from .structure import analyze_system

    if m_phys is None:
        m_phys = physical_mass(bc, mesh)
    system = System(SeparableBare(bc), [decay_channel(bc)], 0, mesh)
    report, _, _ = analyze_system(system, m_phys)
    return complex(report.X.sum()), report
