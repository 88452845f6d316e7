"""Discrete eigenenergies and by-hand normalized radial wave functions.

The momentum-space Schrodinger equation on the mesh reads ``gamma = K(E) gamma``
with ``gamma_j(q) = (E - energy_j(q)) R_j(q)`` and the same kernel ``K`` that
drives the Lippmann-Schwinger solver. Eigenenergies are zeros of
``det(1 - K(E))``; the wave function is the null vector of ``1 - K``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError
from .numerics import MomentumMesh, muller
from .potential import Interaction
from .scattering import System

ROOT_TOL = 1e-8
MAX_ITER = 100
REFERENCE_OFFSET = 200.0  # MeV below the lowest threshold


@dataclass
class DensityProfile:
    """``P_j(q_i) = e^{-3 i theta} q_i^2 R_j(q_i e^{-i theta})^2 / (2 pi^2)``."""

    P: np.ndarray  # (n_channels, n)
    mesh: MomentumMesh

    @property
    def q(self) -> np.ndarray:
        return self.mesh.nodes

    @property
    def X(self) -> np.ndarray:
        return self.P @ self.mesh.weights

    def total(self) -> np.ndarray:
        return self.P.sum(axis=0)


@dataclass
class RadialWaveFunction:
    """Per-channel samples ``R_j(q_i e^{-i theta})`` at a pole."""

    R: np.ndarray  # (n_channels, n)
    E_pole: complex
    theta: float
    L: int
    mesh: MomentumMesh
    channels: tuple
    normalization: str = "by-hand"  # or "amplitude-scaled"

    def gaps(self) -> np.ndarray:
        p = self.mesh.scaled
        return np.array([ch.gap(self.E_pole, p) for ch in self.channels])

    def gamma(self) -> np.ndarray:
        """Vertex ``(E_pole - energy_j) R_j``."""
        return self.gaps() * self.R

    def density(self) -> DensityProfile:
        return density_from_R(self.R, self.mesh)


def density_from_R(R: np.ndarray, mesh: MomentumMesh) -> DensityProfile:
    q = mesh.nodes
    P = np.exp(-3j * mesh.theta) * (q * q / (2.0 * np.pi**2)) * R * R
    return DensityProfile(P, mesh)


def reference_energy(channels: Sequence) -> float:
    """Real energy well below every threshold, used to normalize determinants."""
    return min(float(np.real(ch.threshold)) for ch in channels) - REFERENCE_OFFSET


class Determinant:
    """``det(1 - K(E)) / det(1 - K(E_ref))`` evaluated through log-determinants."""

    def __init__(self, system: System, E_ref: Optional[complex] = None):
        self.system = system
        self.E_ref = reference_energy(system.channels) if E_ref is None else E_ref
        self._log_ref = system.log_det(self.E_ref)

    def __call__(self, E) -> complex:
        return complex(np.exp(self.system.log_det(E) - self._log_ref))


def fredholm_det(model: Interaction, channels: Sequence, L: int, E, mesh: MomentumMesh,
                 E_ref: Optional[complex] = None) -> complex:
    """Normalized Fredholm determinant of the discretized kernel."""
    return Determinant(System(model, channels, L, mesh), E_ref)(E)


def solve_eigenenergy(system: System, E_guess, h: complex = 0.05) -> complex:
    """Muller iteration on the normalized determinant of ``system``."""
    det = Determinant(system)
    E, _ = muller(det, E_guess, h=h, tol=ROOT_TOL, maxiter=MAX_ITER)
    if np.min(np.abs(system.gaps(E))) < 1e-6:
        raise ConvergenceError(f"root {E} drifted onto the discretized continuum")
    return complex(E)


def find_eigenenergy(model: Interaction, channels: Sequence, L: int, E_guess, mesh: MomentumMesh) -> complex:
    """Discrete eigenenergy (bound state or complex-scaled resonance) near ``E_guess``."""
    return solve_eigenenergy(System(model, channels, L, mesh), E_guess)


def scan_bound_states(system: System, E_min: float, E_max: Optional[float] = None,
                      n_scan: int = 400) -> list:
    """Real bound-state energies in ``[E_min, E_max]`` from determinant sign changes.

    Requires ``theta = 0``; ``E_max`` defaults to just below the lowest threshold.
    """
    if system.theta != 0:
        raise DomainError("bound-state scan needs an unrotated mesh")
    thr = min(float(np.real(ch.threshold)) for ch in system.channels)
    if E_max is None:
        E_max = thr - 1e-6
    if not E_min < E_max <= thr:
        raise DomainError("scan window must lie below the lowest threshold")
    det = Determinant(system)
    grid = np.linspace(E_min, E_max, n_scan)
    vals = np.array([det(E).real for E in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            roots.append(a)
        elif fa * fb < 0:
            r = brentq(lambda E: det(E).real, a, b, xtol=1e-10)
            roots.append(solve_eigenenergy(system, r, h=1e-3).real)
    return sorted(roots)


def null_vector(A: np.ndarray) -> np.ndarray:
    """Null vector of a numerically singular matrix from its SVD.

    Raises :class:`DomainError` if the null space is not one-dimensional.
    """
    _, s, vh = sla.svd(A, check_finite=False)
    if s[-1] > 1e-6 * s[0]:
        raise DomainError(f"matrix is not singular (s_min/s_max = {s[-1] / s[0]:.2e}); not at a root")
    if s[-2] < 1e-8 * s[0]:
        raise DomainError("null space is degenerate; the root is not simple")
    return vh[-1].conj()


def _fix_phase(R: np.ndarray, P: np.ndarray) -> np.ndarray:
    i_peak = int(np.argmax(np.abs(P[0])))
    ref = R[0, i_peak]
    if ref == 0:
        return R
    # global sign only: keep the scaling fixed by the normalization
    return -R if ref.real < 0 else R


def radial_wavefunction_system(system: System, E_pole) -> tuple[RadialWaveFunction, DensityProfile]:
    gamma = null_vector(system.one_minus_kernel(E_pole))
    n = system.mesh.n
    R = (gamma / system.gaps(E_pole)).reshape(system.n_channels, n)
    total = density_from_R(R, system.mesh).X.sum()
    R = R / np.sqrt(total)
    prof = density_from_R(R, system.mesh)
    R = _fix_phase(R, prof.P)
    wf = RadialWaveFunction(R, complex(E_pole), system.theta, system.L, system.mesh,
                            system.channels, "by-hand")
    return wf, wf.density()


def radial_wavefunction_normalized(model: Interaction, channels: Sequence, L: int, E_pole,
                                   mesh: MomentumMesh) -> tuple[RadialWaveFunction, DensityProfile]:
    """Null vector of ``1 - K(E_pole)`` scaled so that ``sum_j X_j = 1``.

    The overall sign is fixed by ``Re R_1 > 0`` at the peak of ``|P_1|``.
    """
    return radial_wavefunction_system(System(model, channels, L, mesh), E_pole)
