"""Pole residues, automatically scaled wave functions and compositeness.

Near a pole the half-off-shell amplitude behaves as
``T_jk(E; p', p) ~ gamma_j(p') gamma_k(p) / (E - E_pole)``. The residue
function fixes the wave function ``R_j = gamma_j / (E_pole - energy_j)`` with
its physical normalization, so the compositeness ``X_j`` needs no rescaling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import FactorizationError
from .numerics import MomentumMesh
from .potential import Interaction
from .scattering import System
from .spectrum import (
    DensityProfile,
    RadialWaveFunction,
    density_from_R,
    solve_eigenenergy,
)

FACTORIZATION_TOL = 1e-6


@dataclass
class ResidueVector:
    """``gamma_j(q_i e^{-i theta})`` per channel at a simple pole."""

    gamma: np.ndarray  # (n_channels, n)
    E_pole: complex
    theta: float
    L: int
    residual: float = 0.0
    reference: tuple = (0, 0)


@dataclass
class CompositenessReport:
    E_pole: complex
    X: np.ndarray
    Z: complex
    X_tilde: np.ndarray
    Z_tilde: float
    U: float
    X_dVdE: complex
    theta: float
    provenance: dict = field(default_factory=dict)

    @property
    def binding_energy(self) -> float:
        thr = self.provenance.get("threshold")
        return float(np.real(thr) - self.E_pole.real) if thr is not None else float("nan")

    @property
    def width(self) -> float:
        return -2.0 * self.E_pole.imag


def locate_pole(model: Interaction, channels: Sequence, L: int, E_guess, mesh: MomentumMesh) -> complex:
    """Pole of the amplitude, i.e. a zero of ``det(1 - K(E))``."""
    return solve_eigenenergy(System(model, channels, L, mesh), E_guess)


def default_delta(E_pole) -> float:
    return max(1e-3, 1e-6 * abs(E_pole))


def residue_matrix(system: System, E_pole, delta: float) -> np.ndarray:
    """Symmetric-difference residue with one Richardson step over ``delta, delta/2``."""

    def estimate(d):
        T_plus = system.solve(E_pole + d).matrix
        T_minus = system.solve(E_pole - d).matrix
        return (T_plus - T_minus) * (0.5 * d)

    r1 = estimate(delta)
    r2 = estimate(0.5 * delta)
    return (4.0 * r2 - r1) / 3.0


def factorize_rank_one(r: np.ndarray) -> tuple[np.ndarray, float, int]:
    """``gamma`` with ``r = gamma gamma^T``; returns ``(gamma, residual, ref_index)``."""
    k = int(np.argmax(np.abs(np.diag(r))))
    g_ref = np.sqrt(r[k, k] + 0j)
    if g_ref.real < 0:
        g_ref = -g_ref
    gamma = r[:, k] / g_ref
    resid = np.linalg.norm(r - np.outer(gamma, gamma)) / np.linalg.norm(r)
    return gamma, float(resid), k


def residues_system(system: System, E_pole, delta: Optional[float] = None) -> ResidueVector:
    delta = default_delta(E_pole) if delta is None else delta
    r = residue_matrix(system, E_pole, delta)
    gamma, resid, k = factorize_rank_one(r)
    if resid > FACTORIZATION_TOL:
        raise FactorizationError(
            f"residue is not rank one (residual {resid:.2e}); pole not simple or delta too large"
        )
    n = system.mesh.n
    return ResidueVector(gamma.reshape(system.n_channels, n), complex(E_pole), system.theta,
                         system.L, resid, divmod(k, n))


def extract_residues(model: Interaction, channels: Sequence, L: int, E_pole, mesh: MomentumMesh,
                     delta: Optional[float] = None) -> ResidueVector:
    """Residue function ``gamma_j(q)`` from the amplitude around ``E_pole``."""
    return residues_system(System(model, channels, L, mesh), E_pole, delta)


def wavefunction_from_residues(residues: ResidueVector, channels: Sequence, mesh: MomentumMesh) -> RadialWaveFunction:
    p = mesh.scaled
    gaps = np.array([ch.gap(residues.E_pole, p) for ch in channels])
    return RadialWaveFunction(residues.gamma / gaps, residues.E_pole, residues.theta, residues.L,
                              mesh, tuple(channels), "amplitude-scaled")


def density_profile(residues: ResidueVector, channels: Sequence, mesh: MomentumMesh) -> DensityProfile:
    """Density ``P_j(q)`` from the residues, with no rescaling."""
    return density_from_R(wavefunction_from_residues(residues, channels, mesh).R, mesh)


def compositeness_X(profile: DensityProfile, mesh: Optional[MomentumMesh] = None) -> np.ndarray:
    mesh = profile.mesh if mesh is None else mesh
    return profile.P @ mesh.weights


def missing_and_tilde(X) -> tuple[complex, np.ndarray, float, float]:
    """``(Z, X_tilde, Z_tilde, U)`` from the complex compositeness values."""
    X = np.atleast_1d(np.asarray(X, dtype=complex))
    Z = 1.0 - X.sum()
    U = np.abs(X).sum() + abs(Z) - 1.0
    return complex(Z), np.abs(X) / (1.0 + U), float(abs(Z) / (1.0 + U)), float(U)


def compositeness_dVdE(wavefunction: RadialWaveFunction, model: Interaction,
                       mesh: Optional[MomentumMesh] = None) -> complex:
    """``1 + e^{-6 i theta} sum_jk int int q^2 q'^2 R_j R_k dV_jk/dE / (2 pi^2)^2``."""
    mesh = wavefunction.mesh if mesh is None else mesh
    system = System(model, wavefunction.channels, wavefunction.L, mesh)
    dV = system.dpotential_dE(wavefunction.E_pole)
    q, w = mesh.nodes, mesh.weights
    u = (np.tile(w * q * q / (2.0 * np.pi**2), system.n_channels) * wavefunction.R.ravel())
    return complex(1.0 + np.exp(-6j * mesh.theta) * (u @ dV @ u))


def analyze_system(system: System, E_guess, delta: Optional[float] = None,
                   E_pole: Optional[complex] = None) -> tuple[CompositenessReport, RadialWaveFunction, DensityProfile]:
    """Full amplitude-route pipeline: pole, residues, profile, X, Z, X-tilde and the dV/dE check."""
    if E_pole is None:
        E_pole = solve_eigenenergy(system, E_guess)
    res = residues_system(system, E_pole, delta)
    wf = wavefunction_from_residues(res, system.channels, system.mesh)
    prof = wf.density()
    X = prof.X
    Z, Xt, Zt, U = missing_and_tilde(X)
    XdV = compositeness_dVdE(wf, system.model, system.mesh)
    # binding energies are quoted relative to the first channel
    thr = system.channels[0].threshold
    report = CompositenessReport(
        complex(E_pole), X, Z, Xt, Zt, U, XdV, system.theta,
        {"model": type(system.model).__name__, "mesh": system.mesh.describe(), "L": system.L,
         "threshold": thr, "factorization_residual": res.residual},
    )
    return report, wf, prof
