"""Independent reference solutions used by the tests."""
import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal
from scipy.special import spherical_jn, spherical_yn

from polewave.kinematics import HBARC
from polewave.potential import Interaction


def coordinate_phase_shift(vfun, mu, E_kin, L, r_max=30.0):
    """Phase shift of the radial Schroedinger equation integrated outward with scipy."""
    k = np.sqrt(2 * mu * E_kin) / HBARC  # fm^-1
    c = 2 * mu / HBARC**2

    def rhs(r, y):
        return [y[1], (L * (L + 1) / r**2 + c * (vfun(r) - E_kin)) * y[0]]

    r0 = 1e-4
    sol = solve_ivp(rhs, (r0, r_max), [r0 ** (L + 1), (L + 1) * r0**L], rtol=1e-11, atol=1e-30,
                    method="DOP853", dense_output=True)
    r1, r2 = r_max - 1.3, r_max
    u1, u2 = sol.sol(r1)[0], sol.sol(r2)[0]
    jh = lambda r: k * r * spherical_jn(L, k * r)
    nh = lambda r: k * r * spherical_yn(L, k * r)
    a, b = np.linalg.solve([[jh(r1), nh(r1)], [jh(r2), nh(r2)]], [u1, u2])
    return np.arctan(-b / a)


def coordinate_levels(vfun, mu, L, n_levels, r_max=30.0, h=0.004):
    """Lowest eigenvalues (MeV below threshold) of the radial Hamiltonian by finite differences
    with one Richardson extrapolation in the step."""

    def levels(step):
        r = np.arange(1, int(r_max / step)) * step
        kin = HBARC**2 / (2 * mu * step**2)
        diag = 2 * kin + vfun(r) + HBARC**2 * L * (L + 1) / (2 * mu * r**2)
        off = -kin * np.ones(r.size - 1)
        return eigh_tridiagonal(diag, off, select="i", select_range=(0, n_levels - 1))[0]

    return (4 * levels(h / 2) - levels(h)) / 3


class Yamaguchi(Interaction):
    """Rank-one ``lam g(p') g(p)`` with ``g(p) = 1 / (p^2 + beta^2)``."""

    def __init__(self, lam, beta):
        self.lam = lam
        self.beta = beta

    def strength(self, E):
        return self.lam + 0.0 * E

    def dstrength(self, E):
        return 0.0 * E

    def g(self, p):
        return 1.0 / (np.asarray(p) ** 2 + self.beta**2)

    def shape(self, L, p_out, p_in, contour=0.0):
        return np.outer(self.g(np.atleast_1d(p_out)), self.g(np.atleast_1d(p_in)))


def yamaguchi_loop(model, ch, E, phi=0.4):
    """``int dq q^2/(2pi^2) g^2 / (E - energy(q) + i0)`` with mpmath along a rotated ray."""
    rot = mp.exp(-1j * mp.mpf(phi))

    def f(t):
        q = t * rot
        g = 1 / (q * q + model.beta**2)
        return rot**3 * t * t * g * g / (mp.mpc(E) - ch.threshold - q * q / (2 * ch.reduced_mass))

    return complex(mp.quad(f, [0, 100, 1000, mp.inf]) / (2 * mp.pi**2))


def yamaguchi_T(model, ch, E, p1, p2, phi=0.4):
    return model.g(p1) * model.g(p2) / (1.0 / model.lam - yamaguchi_loop(model, ch, E, phi))


def sigma_second_sheet(bc, E):
    """Decay self-energy continued below the cut: real-axis integral plus the pole discontinuity."""
    E = mp.mpc(E)
    f = lambda k: bc.alpha * bc.lambda_cut**2 / (k * k + bc.lambda_cut**2)
    k_E = mp.sqrt(E * E / 4 - bc.m_d**2)
    if mp.im(k_E) > 0:
        k_E = -k_E
    # break the real-axis integral around the nearby pole
    kr, w = mp.re(k_E), abs(mp.im(k_E)) + 1
    pts = sorted({0, 1000} | ({kr - 5 * w, kr, kr + 5 * w} if kr > 5 * w else set()))
    first = mp.quad(lambda k: k * k * f(k) ** 2 / (E - 2 * mp.sqrt(k * k + bc.m_d**2)),
                    pts + [mp.inf]) / (2 * mp.pi**2)
    return first - 1j * E * k_E * f(k_E) ** 2 / (4 * mp.pi)


def physical_mass_oracle(bc, guess):
    return complex(mp.findroot(lambda m: m - bc.m_bare - sigma_second_sheet(bc, m), mp.mpc(guess)))
