import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from polewave.errors import DomainError, NearPoleError
from polewave.kinematics import Channel
from polewave.numerics import rational_mapped_mesh, tangent_mapped_mesh
from polewave.potential import CoupledGaussian, EnergyLaw, WoodsSaxon
from polewave.scattering import System, build_kernel, onshell_real_axis, optical_residual, second_born

from oracles import Yamaguchi, coordinate_phase_shift, yamaguchi_T

LAMBDA = Channel(1115.7, 39049.5)
KC = [Channel(495.7, 938.9, "SR"), Channel(138.0, 1193.1, "SR")]


@pytest.fixture(scope="module")
def ws_system():
    return System(WoodsSaxon(), [LAMBDA], 0, rational_mapped_mesh(120, 300, 6000, theta=0.2))


@pytest.fixture(scope="module")
def kc_system():
    return System(CoupledGaussian(), KC, 0, rational_mapped_mesh(100, 400, 6000, theta=0.3))


@given(st.floats(-30, 30), st.floats(-20, 5))
def test_amplitude_symmetric_and_solves_ls(kc_system, re, im):
    E = 1420.0 + re + 1j * im
    T = kc_system.solve(E).matrix
    kern = kc_system.kernel(E)
    assert np.linalg.norm(T - T.T) <= 1e-10 * np.linalg.norm(T)
    assert np.linalg.norm(T - kern.V - kern.matrix @ T) <= 1e-10 * np.linalg.norm(T)


@pytest.mark.parametrize("L", [0, 1, 2])
@pytest.mark.parametrize("E_kin", [0.5, 5.0, 40.0])
def test_phase_shift_matches_coordinate_space(L, E_kin):
    model = WoodsSaxon()
    mesh = rational_mapped_mesh(200, 300, 6000)
    res = onshell_real_axis(model, [LAMBDA], L, LAMBDA.threshold + E_kin, mesh)
    delta = res.phase_shifts()[0]
    ref = coordinate_phase_shift(lambda r: -35.0 / (1 + np.exp((r - 3.6) / 0.5)), LAMBDA.reduced_mass, E_kin, L)
    d = (delta - ref + np.pi / 2) % np.pi - np.pi / 2
    assert abs(d) < 1e-6


@pytest.mark.parametrize("E_kin", [1.0, 20.0, 150.0])
def test_separable_onshell_exact(E_kin):
    ch = Channel(938.9, 938.9)
    model = Yamaguchi(-2e5, 300.0)
    E = ch.threshold + E_kin
    res = onshell_real_axis(model, [ch], 0, E, rational_mapped_mesh(200, 300, 60000))
    k = ch.onshell_momentum(E).real
    ref = yamaguchi_T(model, ch, E, k, k)
    assert abs(res.T[0, 0] - ref) <= 2e-6 * abs(ref)


def test_separable_offshell_on_rotated_contour():
    ch = Channel(938.9, 938.9)
    model = Yamaguchi(-2e5, 300.0)
    mesh = tangent_mapped_mesh(200, 300, theta=0.4)
    E = ch.threshold + 30.0 - 8.0j
    T = System(model, [ch], 0, mesh).solve(E).matrix
    p = mesh.scaled
    for i, j in [(10, 10), (40, 90), (150, 5)]:
        ref = yamaguchi_T(model, ch, E, p[i], p[j])
        assert abs(T[i, j] - ref) <= 1e-8 * abs(ref)


@given(st.floats(1.0, 200.0))
def test_optical_theorem_single_channel(E_kin):
    res = onshell_real_axis(WoodsSaxon(), [LAMBDA], 0, LAMBDA.threshold + E_kin, rational_mapped_mesh(80, 300, 6000))
    assert optical_residual(res) < 1e-8


@given(st.floats(1370.0, 1600.0))
def test_unitarity_coupled_channels(E):
    res = onshell_real_axis(CoupledGaussian(), KC, 0, E, rational_mapped_mesh(80, 400, 6000))
    assert optical_residual(res) < 1e-8
    S = res.s_matrix()
    assert np.allclose(S @ S.conj().T, np.eye(S.shape[0]), atol=1e-9)
    assert len(res.open_channels) == (2 if E > KC[0].threshold else 1)


def test_second_born_limit():
    mesh = rational_mapped_mesh(100, 300, 6000)
    ratios = []
    for v0 in (-1e-2, -1e-3):
        system = System(WoodsSaxon(EnergyLaw(v0)), [LAMBDA], 0, mesh)
        E = LAMBDA.threshold - 5.0
        T = system.solve(E).matrix
        ratios.append(np.linalg.norm(T - second_born(system, E)) / np.linalg.norm(T - system.potential(E)))
    # the remainder is third order, so the ratio falls linearly with the coupling
    assert ratios[0] / ratios[1] == pytest.approx(10.0, rel=0.05)


def test_near_pole_error_at_exact_discrete_pole():
    ch = Channel(938.9, 938.9)
    model = Yamaguchi(-2e6, 300.0)  # binds: |lam| exceeds 4 pi beta^3 / mu
    system = System(model, [ch], 0, tangent_mapped_mesh(60, 300))
    f = lambda E: (1.0 - system.kernel(E).matrix.trace()).real  # rank one: det = 1 - tr K
    E_b = brentq(f, ch.threshold - 500.0, ch.threshold - 1e-3, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    with pytest.raises(NearPoleError):
        system.solve(E_b)
    system.solve(E_b - 1.0)  # away from the pole the solve is fine


def test_kernel_structure(kc_system):
    E = 1400.0 - 2.0j
    kern = build_kernel(kc_system.model, kc_system.channels, 0, E, kc_system.mesh)
    assert np.allclose(kern.matrix, kern.V * kern.D[None, :])
    assert np.allclose(kern.D, kc_system.measure() / kc_system.gaps(E))


def test_scattering_errors():
    mesh = rational_mapped_mesh(40, 300, 6000)
    with pytest.raises(DomainError):
        System(CoupledGaussian(), [LAMBDA], 0, mesh)
    with pytest.raises(DomainError):
        onshell_real_axis(WoodsSaxon(), [LAMBDA], 0, LAMBDA.threshold - 1.0, mesh)
    with pytest.raises(DomainError):
        onshell_real_axis(WoodsSaxon(), [LAMBDA], 0, LAMBDA.energy(7000.0), mesh)
