"""Two-body channels: kinetic energies, on-shell momenta and phase space.

All masses, energies and momenta are in MeV. Every function accepts complex
momenta and energies so that it can be used on complex-scaled contours
``p = q exp(-i theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DomainError

HBARC = 197.3269804  # MeV fm

Mode = Literal["NR", "SR"]


def kallen(x, y, z):
    """Kallen triangle function x^2 + y^2 + z^2 - 2xy - 2yz - 2zx."""
    return x * x + y * y + z * z - 2.0 * (x * y + y * z + z * x)


@dataclass(frozen=True)
class Channel:
    """Two particles of masses ``m`` and ``M`` with a kinetic-energy scheme.

    ``mode`` is ``"NR"`` for ``m + M + p^2/(2 mu)`` and ``"SR"`` for
    ``sqrt(p^2 + m^2) + sqrt(p^2 + M^2)``.
    """

    m: float
    M: float
    mode: Mode = "NR"
    label: str = ""

    def __post_init__(self):
        if not (self.m > 0 and self.M > 0):
            raise DomainError(f"masses must be positive, got m={self.m}, M={self.M}")
        if self.mode not in ("NR", "SR"):
            raise DomainError(f"unknown kinematics mode {self.mode!r}")

    @property
    def threshold(self) -> float:
        return self.m + self.M

    @property
    def reduced_mass(self) -> float:
        return self.m * self.M / (self.m + self.M)

    def _check_branch(self, p):
        if self.mode == "SR":
            p2 = np.asarray(p) ** 2
            if np.any(p2 == -self.m**2) or np.any(p2 == -self.M**2):
                raise DomainError("momentum sits on a branch point of the SR energy")

    def kinetic(self, p):
        """Energy above threshold, evaluated without cancellation."""
        self._check_branch(p)
        p = np.asarray(p)
        p2 = p * p
        if self.mode == "NR":
            out = p2 / (2.0 * self.reduced_mass)
        else:
            out = p2 / (np.sqrt(p2 + self.m**2) + self.m) + p2 / (np.sqrt(p2 + self.M**2) + self.M)
        return out if out.ndim else out[()]

    def energy(self, p):
        return self.threshold + self.kinetic(p)

    def denergy_dp(self, p):
        """Derivative of the two-body energy with respect to momentum."""
        self._check_branch(p)
        p = np.asarray(p)
        if self.mode == "NR":
            out = p / self.reduced_mass
        else:
            out = p / np.sqrt(p * p + self.m**2) + p / np.sqrt(p * p + self.M**2)
        return out if out.ndim else out[()]

    def gap(self, E, p):
        """``E - energy(p)`` computed relative to threshold."""
        return (E - self.threshold) - self.kinetic(p)

    def onshell_momentum(self, E, sheet: Optional[str] = None):
        return onshell_momentum(self, E, sheet=sheet)

    def phase_space(self, E):
        return phase_space(self, E)


def energy(ch: Channel, p):
    """Two-body energy of channel ``ch`` at (complex) relative momentum ``p``."""
    return ch.energy(p)


def onshell_momentum(ch: Channel, E, sheet: Optional[str] = None):
    """Relative momentum ``k`` with ``energy(ch, k) == E``.

    The principal square root is used by default, which gives ``k >= 0`` for
    real ``E`` above threshold and ``Im k <= 0`` for resonance energies with
    ``Im E < 0``. ``sheet="physical"`` forces ``Im k >= 0`` and
    ``sheet="unphysical"`` forces ``Im k <= 0``.
    """
    E = np.asarray(E, dtype=complex)
    if ch.mode == "NR":
        k2 = 2.0 * ch.reduced_mass * (E - ch.threshold)
    else:
        if np.any(E == 0):
            raise DomainError("SR on-shell momentum is undefined at E = 0")
        k2 = kallen(E * E, ch.m**2, ch.M**2) / (4.0 * E * E)
    k = np.sqrt(k2)
    if sheet == "physical":
        k = np.where(k.imag < 0, -k, k)
    elif sheet == "unphysical":
        k = np.where(k.imag > 0, -k, k)
    elif sheet is not None:
        raise DomainError(f"unknown sheet {sheet!r}")
    if k.ndim == 0:
        k = k[()]
        if k.imag == 0:
            return complex(k.real, 0.0)
    return k


def phase_space(ch: Channel, E: float) -> float:
    """Phase-space factor ``rho`` entering the optical theorem."""
    if np.iscomplexobj(E) and np.imag(E) != 0:
        raise DomainError("phase space is defined for real energies only")
    E = float(np.real(E))
    if E < ch.threshold:
        raise DomainError(f"E={E} is below the threshold {ch.threshold}")
    k = onshell_momentum(ch, E).real
    if ch.mode == "NR":
        return ch.reduced_mass * k / np.pi
    return np.sqrt(k * k + ch.m**2) * np.sqrt(k * k + ch.M**2) * k / (np.pi * E)
