import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.special import spherical_jn

from polewave.errors import DomainError
from polewave.kinematics import HBARC
from polewave.potential import (
    CoupledGaussian,
    DoubleGaussian,
    EnergyLaw,
    WoodsSaxon,
    YukawaFormFactor,
    dV_dE_partial_wave,
    legendre_Q,
    project_partial_wave,
)

mp.mp.dps = 30


def gaussian_closed_form(L, p1, p2, b):
    """4 pi int r^2 j_L(p1 r) j_L(p2 r) exp(-r^2/b^2) dr / hbarc^3 for complex p1, p2."""
    a1, a2 = mp.mpc(p1) / HBARC, mp.mpc(p2) / HBARC
    rho2 = 1 / mp.mpf(b) ** 2
    val = (mp.pi / (2 * mp.sqrt(a1 * a2)) / (2 * rho2) * mp.exp(-(a1**2 + a2**2) / (4 * rho2))
           * mp.besseli(L + mp.mpf(1) / 2, a1 * a2 / (2 * rho2)))
    return complex(4 * mp.pi * val / HBARC**3)


@pytest.mark.parametrize("L", [0, 1, 3])
@pytest.mark.parametrize("theta", [0.0, 0.35])
def test_gaussian_shape_closed_form(L, theta):
    model = CoupledGaussian(b=0.5)
    p = np.array([20.0, 350.0, 1200.0, 3000.0]) * np.exp(-1j * theta)
    S = model.shape(L, p, p, theta)
    for i in range(p.size):
        for j in range(p.size):
            ref = gaussian_closed_form(L, p[i], p[j], 0.5)
            assert abs(S[i, j] - ref) <= 1e-9 * abs(S).max()


def test_double_gaussian_is_difference_of_gaussians():
    model = DoubleGaussian(b1=2.5, b2=5.0)
    p = np.array([10.0, 80.0, 200.0]) * np.exp(-0.3j)
    S = model.shape(0, p, p, 0.3)
    ref = np.array([[2 * gaussian_closed_form(0, a, c, 2.5) - gaussian_closed_form(0, a, c, 5.0)
                     for c in p] for a in p])
    assert np.allclose(S, ref, rtol=1e-9, atol=1e-9 * np.abs(ref).max())


@pytest.mark.parametrize("L", [0, 2])
def test_woods_saxon_against_direct_quadrature(L):
    model = WoodsSaxon(EnergyLaw(-35.0), 3.6, 0.5)
    ps = [50.0, 400.0]
    S = model.shape(L, np.array(ps), np.array(ps), 0.0)
    for i, p1 in enumerate(ps):
        for j, p2 in enumerate(ps):
            f = lambda r: r * r * spherical_jn(L, p1 * r / HBARC) * spherical_jn(L, p2 * r / HBARC) / (
                1 + np.exp((r - 3.6) / 0.5))
            val, _ = quad(f, 0, 40, limit=400, epsabs=1e-13)
            assert S[i, j].real == pytest.approx(4 * np.pi * val / HBARC**3, rel=1e-9)


def test_woods_saxon_contour_independence():
    # rotating the radial contour must not change the analytic continuation
    model = WoodsSaxon()
    theta = 0.2
    p = np.array([30.0, 120.0, 250.0]) * np.exp(-1j * theta)
    S_rot = model.shape(1, p, p, theta)
    S_real = model.shape(1, p, p, 0.0)
    assert np.allclose(S_rot, S_real, rtol=1e-9)


@given(st.lists(st.floats(1.0, 3000.0), min_size=2, max_size=5, unique=True))
def test_shape_symmetric(ps):
    p = np.array(ps) * np.exp(-0.2j)
    for model in (WoodsSaxon(), CoupledGaussian(), YukawaFormFactor()):
        S = model.shape(1, p, p, 0.2)
        assert np.allclose(S, S.T, rtol=1e-12, atol=1e-14 * np.abs(S).max())


def yukawa_s_wave(p1, p2, mass):
    return np.pi / (p1 * p2) * np.log(((p1 + p2) ** 2 + mass**2) / ((p1 - p2) ** 2 + mass**2))


@given(st.floats(1.0, 3000.0), st.floats(1.0, 3000.0))
def test_yukawa_s_wave_closed_form(p1, p2):
    bare = YukawaFormFactor(-2.0, 450.0, None)
    assert bare.shape(0, [p1], [p2])[0, 0].real == pytest.approx(yukawa_s_wave(p1, p2, 450.0), rel=1e-10)
    ff = YukawaFormFactor(-2.0, 450.0, 1000.0)
    ref = 1000.0**2 / (1000.0**2 - 450.0**2) * (yukawa_s_wave(p1, p2, 450.0) - yukawa_s_wave(p1, p2, 1000.0))
    assert ff.shape(0, [p1], [p2])[0, 0].real == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("L", [0, 1, 4])
@pytest.mark.parametrize("pp", [(2000.0, 2005.0), (300.0, 900.0), (1500.0 * np.exp(-0.35j), 1480.0 * np.exp(-0.35j))])
def test_yukawa_projection_vs_mpmath(L, pp):
    # includes nearly equal large momenta, where the angular integrand is sharply peaked
    model = YukawaFormFactor(-2.0, 450.0, 1000.0)
    p1, p2 = pp
    f = lambda x: mp.legendre(L, x) * model.momentum_shape(mp.mpc(p1) ** 2 + mp.mpc(p2) ** 2 - 2 * mp.mpc(p1) * mp.mpc(p2) * x)
    ref = complex(0.5 * mp.quad(f, [-1, 0, 0.9, 0.99, 1]))
    got = model.shape(L, [p1], [p2])[0, 0]
    assert abs(got - ref) <= 1e-9 * abs(ref)


def test_legendre_Q_against_mpmath():
    # the closed form is only used inside the Bernstein ellipse where the recurrence is stable
    for L in range(13):
        for z in (1.0001, 1.02, 1.03 - 0.01j, -1.01 + 0.002j):
            ref = complex(mp.legenq(L, 0, z, type=3))
            assert abs(legendre_Q(L, z) - ref) <= 1e-10 * abs(ref)


def test_energy_law():
    law = EnergyLaw(-35.0, 0.5, 100.0)
    assert law(100.0) == -35.0
    assert law(110.0) == pytest.approx(-30.0)
    assert law.derivative(3.0) == 0.5
    assert law.pinned(0.2, 5.0) == EnergyLaw(-35.0, 0.2, 5.0)


def test_block_couplings_and_derivative():
    model = CoupledGaussian(EnergyLaw(-650.0, 0.3, 1400.0), b=0.5, x=0.5)
    p = np.array([100.0, 500.0])
    S = model.shape(0, p, p)
    B = model.block(0, 1410.0, p, shape=S)
    assert np.allclose(B[:2, :2], (-650.0 + 3.0) * S)
    assert np.allclose(B[:2, 2:], (-650.0 + 3.0) * 0.5 * S)
    assert np.allclose(B[2:, 2:], 0.0)
    dB = model.block(0, 1410.0, p, shape=S, derivative=True)
    assert np.allclose(dB[:2, 2:], 0.3 * 0.5 * S)
    assert project_partial_wave(model, 0, 0, 1, 1410.0, 100.0, 500.0) == pytest.approx(B[0, 3])
    assert dV_dE_partial_wave(model, 0, 1, 0, 1410.0, 500.0, 100.0) == pytest.approx(dB[3, 0])


def test_potential_errors():
    with pytest.raises(DomainError):
        WoodsSaxon().shape(0, [1.0], [1.0], contour=np.radians(25))
    with pytest.raises(DomainError):
        CoupledGaussian().shape(13, [1.0], [1.0])
    with pytest.raises(DomainError):
        YukawaFormFactor(cutoff=450.0)
    with pytest.raises(DomainError):
        project_partial_wave(WoodsSaxon(), 0, 1, 0, 0.0, 1.0, 1.0)


def test_unbounded_mesh_rejected_for_local_potentials():
    from polewave.numerics import tangent_mapped_mesh

    p = tangent_mapped_mesh(200, 300).nodes
    with pytest.raises(DomainError):
        WoodsSaxon().shape(0, p, p)
