"""Discretized (complex-scaled) Lippmann-Schwinger equation.

The half-off-shell amplitude on the mesh solves ``T = V + K T`` with the
kernel::

    K[(j,i), (l,i')] = V_L,jl(E; p_i, p_i') * w_i' q_i'^2 e^{-3 i theta}
                       / (2 pi^2 (E - energy_l(p_i')))

where ``p = q exp(-i theta)``. Rows and columns are ordered channel-major.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, NearPoleError
from .kinematics import Channel, phase_space
from .numerics import MomentumMesh
from .potential import Interaction

log = logging.getLogger(__name__)

RCOND_MIN = 1e-14
RESIDUAL_TOL = 1e-10


class System:
    """A model, its channels, one partial wave and a mesh, with cached shapes."""

    def __init__(self, model: Interaction, channels: Sequence, L: int, mesh: MomentumMesh):
        channels = tuple(channels)
        if len(channels) != model.n_channels:
            raise DomainError(f"model has {model.n_channels} channels, got {len(channels)}")
        model.check(L)
        self.model = model
        self.channels = channels
        self.L = L
        self.mesh = mesh
        self.p = mesh.scaled
        self._shape = None

    @property
    def theta(self) -> float:
        return self.mesh.theta

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    @property
    def dim(self) -> int:
        return self.n_channels * self.mesh.n

    @property
    def shape(self) -> np.ndarray:
        if self._shape is None:
            self._shape = self.model.shape(self.L, self.p, self.p, self.theta)
        return self._shape

    def with_model(self, model: Interaction) -> "System":
        """Same mesh and channels with another model of identical shape."""
        other = System(model, self.channels, self.L, self.mesh)
        other._shape = self._shape
        return other

    def potential(self, E) -> np.ndarray:
        return self.model.block(self.L, E, self.p, self.theta, shape=self.shape)

    def dpotential_dE(self, E) -> np.ndarray:
        return self.model.block(self.L, E, self.p, self.theta, shape=self.shape, derivative=True)

    def gaps(self, E) -> np.ndarray:
        """``E - energy_l(p_i)`` for all channel-major indices."""
        return np.concatenate([ch.gap(E, self.p) for ch in self.channels])

    def energies(self, E) -> np.ndarray:
        return E - self.gaps(E)

    def measure(self) -> np.ndarray:
        """``w q^2 e^{-3 i theta} / (2 pi^2)`` for all channel-major indices."""
        q, w = self.mesh.nodes, self.mesh.weights
        one = w * q * q * np.exp(-3j * self.theta) / (2.0 * np.pi**2)
        return np.tile(one, self.n_channels)

    def propagator(self, E) -> np.ndarray:
        gaps = self.gaps(E)
        if np.any(gaps == 0):
            raise DomainError(
                "energy coincides with a mesh point of the (rotated) continuum; "
                "change the mesh or the scaling angle"
            )
        return self.measure() / gaps

    def kernel(self, E) -> "KernelMatrix":
        V = self.potential(E)
        D = self.propagator(E)
        return KernelMatrix(V * D[None, :], E, self.theta, V, D)

    def one_minus_kernel(self, E) -> np.ndarray:
        K = self.kernel(E).matrix
        return np.eye(self.dim) - K

    def log_det(self, E) -> complex:
        """Complex logarithm of ``det(1 - K(E))`` (branch of the phase arbitrary)."""
        sign, logabs = np.linalg.slogdet(self.one_minus_kernel(E))
        return logabs + 1j * np.angle(sign)

    def solve(self, E) -> "AmplitudeMatrix":
        return solve_half_offshell(self.kernel(E), system=self)


@dataclass
class KernelMatrix:
    matrix: np.ndarray
    E: complex
    theta: float
    V: np.ndarray
    D: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass
class AmplitudeMatrix:
    """``T_L,jk(E; p_i, p_i')`` over channel-major indices."""

    matrix: np.ndarray
    E: complex
    theta: float
    L: int
    n_channels: int

    def block(self, j: int, k: int) -> np.ndarray:
        n = self.matrix.shape[0] // self.n_channels
        return self.matrix[j * n:(j + 1) * n, k * n:(k + 1) * n]


def build_kernel(model: Interaction, channels: Sequence, L: int, E, mesh: MomentumMesh) -> KernelMatrix:
    return System(model, channels, L, mesh).kernel(E)


def solve_half_offshell(kernel: KernelMatrix, model: Optional[Interaction] = None, E=None,
                        mesh: Optional[MomentumMesh] = None, system: Optional[System] = None,
                        L: Optional[int] = None) -> AmplitudeMatrix:
    """Solve ``(1 - K) T = V`` by LU with partial pivoting.

    Raises :class:`NearPoleError` when the reciprocal condition number drops
    below ``1e-14`` or the backward error of the solve exceeds ``1e-10``.
    """
    A = np.eye(kernel.dim) - kernel.matrix
    V = kernel.V
    lu, piv = sla.lu_factor(A, check_finite=False)
    anorm = np.linalg.norm(A, 1)
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    if rcond < RCOND_MIN:
        raise NearPoleError(f"1 - K is numerically singular at E={kernel.E} (rcond={rcond:.2e})")
    T = sla.lu_solve((lu, piv), V, check_finite=False)
    # normwise backward error; ||V|| alone is dwarfed by ||T|| next to a pole
    scale = np.linalg.norm(A) * np.linalg.norm(T) + np.linalg.norm(V)
    resid = np.linalg.norm(A @ T - V) / scale if scale > 0 else 0.0
    if resid > RESIDUAL_TOL:
        raise NearPoleError(f"LS residual {resid:.2e} at E={kernel.E}; too close to a pole")
    if system is not None:
        L, nch = system.L, system.n_channels
    else:
        nch = 1 if model is None else model.n_channels
    return AmplitudeMatrix(T, kernel.E, kernel.theta, L if L is not None else -1, nch)


@dataclass
class OnShellResult:
    """On-shell amplitudes between open channels at a real energy."""

    E: float
    open_channels: list
    T: np.ndarray  # (n_open, n_open)
    rho: np.ndarray  # phase space of the open channels
    momenta: np.ndarray

    def s_matrix(self) -> np.ndarray:
        r = np.sqrt(self.rho)
        return np.eye(len(r)) - 1j * r[:, None] * self.T * r[None, :]

    def phase_shifts(self) -> np.ndarray:
        """Eigenphases of the S matrix, in radians."""
        return 0.5 * np.angle(np.linalg.eigvals(self.s_matrix()))


def onshell_real_axis(model: Interaction, channels: Sequence, L: int, E: float,
                      mesh: MomentumMesh) -> OnShellResult:
    """On-shell ``T`` at real ``E`` with the principal-value subtraction.

    Each open channel gets its on-shell momentum appended as an extra node;
    the ``1/(E - energy + i0)`` singularity is handled by subtracting the
    pole term and adding its principal-value and ``-i pi`` parts analytically.
    """
    E = float(E)
    channels = tuple(channels)
    if len(channels) != model.n_channels:
        raise DomainError("channel count mismatch")
    if all(E <= ch.threshold for ch in channels):
        raise DomainError(f"E={E} is below every threshold")
    q, w = mesh.nodes, mesh.weights
    blocks, D, open_idx, ks = [], [], [], []
    start = 0
    for l, ch in enumerate(channels):
        is_open = E > ch.threshold
        d = w * q * q / (2.0 * np.pi**2) / ch.gap(E, q.astype(complex))
        if is_open:
            k = ch.onshell_momentum(E).real
            if k >= mesh.q_max:
                raise DomainError(f"on-shell momentum {k:.1f} MeV exceeds the mesh cutoff")
            if np.min(np.abs(q - k)) < 1e-9 * k:
                raise DomainError("on-shell momentum coincides with a mesh node")
            h0 = 2.0 * k / ch.denergy_dp(k)
            pv_tail = 0.0
            if np.isfinite(mesh.q_max):
                pv_tail = np.log((mesh.q_max + k) / (mesh.q_max - k)) / (2.0 * k)
            sub = -np.sum(w / (k * k - q * q)) + pv_tail - 1j * np.pi / (2.0 * k)
            d = np.append(d, k * k * h0 / (2.0 * np.pi**2) * sub)
            blocks.append(np.append(q, k))
            open_idx.append(start + q.size)
            ks.append(k)
        else:
            blocks.append(q.copy())
        D.append(d)
        start += blocks[-1].size
    p_all = np.concatenate(blocks).astype(complex)
    S = model.shape(L, p_all, p_all, 0.0)
    sizes = [b.size for b in blocks]
    offs = np.cumsum([0] + sizes)
    V = np.empty((offs[-1], offs[-1]), dtype=complex)
    for j in range(len(channels)):
        for l in range(len(channels)):
            V[offs[j]:offs[j + 1], offs[l]:offs[l + 1]] = (
                model.strength(E) * model.couplings[j, l] * S[offs[j]:offs[j + 1], offs[l]:offs[l + 1]]
            )
    Dv = np.concatenate(D)
    K = V * Dv[None, :]
    T = np.linalg.solve(np.eye(V.shape[0]) - K, V)
    idx = np.array(open_idx)
    open_channels = [l for l, ch in enumerate(channels) if E > ch.threshold]
    rho = np.array([phase_space(channels[l], E) for l in open_channels])
    return OnShellResult(E, open_channels, T[np.ix_(idx, idx)], rho, np.array(ks))


def optical_residual(result: OnShellResult) -> float:
    """Largest relative violation of ``Im T_jj = -sum_k rho_k |T_jk|^2 / 2``."""
    T, rho = result.T, result.rho
    worst = 0.0
    for j in range(len(rho)):
        rhs = 0.5 * np.sum(rho * np.abs(T[j]) ** 2)
        scale = abs(T[j, j].imag) + rhs
        if scale == 0:
            continue
        worst = max(worst, abs(T[j, j].imag + rhs) / scale)
    return worst


def second_born(system: System, E) -> np.ndarray:
    """``V + V G V`` on the mesh (weak-coupling approximation of ``T``)."""
    V = system.potential(E)
    D = system.propagator(E)
    return V + (V * D[None, :]) @ V
