import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import eval_legendre, spherical_jn

from polewave.errors import ConvergenceError, DomainError
from polewave.numerics import (
    gauss_legendre,
    legendre_P,
    muller,
    radial_grid,
    rational_mapped_mesh,
    sph_bessel_j,
    tangent_mapped_mesh,
)


@pytest.mark.parametrize("n", [1, 4, 11])
def test_gauss_legendre_exact_for_polynomials(n):
    x, w = gauss_legendre(n, 0.5, 3.0)
    for k in range(2 * n):
        exact = (3.0 ** (k + 1) - 0.5 ** (k + 1)) / (k + 1)
        assert np.dot(w, x**k) == pytest.approx(exact, rel=1e-12)


def test_tangent_mesh_integrates_lorentzian():
    mesh = tangent_mapped_mesh(100, 300.0)
    for s in (100.0, 300.0, 1000.0):
        assert np.dot(mesh.weights, 1 / (mesh.nodes**2 + s * s)) == pytest.approx(np.pi / (2 * s), rel=1e-8)


def test_rational_mesh_integrates_on_finite_interval():
    mesh = rational_mapped_mesh(200, 300.0, 6000.0)
    s = 400.0
    exact = np.arctan(6000.0 / s) / s
    assert np.dot(mesh.weights, 1 / (mesh.nodes**2 + s * s)) == pytest.approx(exact, rel=1e-10)
    assert mesh.nodes[-1] < 6000.0


def test_mesh_properties():
    mesh = rational_mapped_mesh(64, 150.0, 1500.0, theta=0.2)
    assert np.allclose(mesh.scaled, mesh.nodes * np.exp(-0.2j))
    assert mesh.refined().n == 128 and mesh.refined().theta == 0.2
    assert mesh.with_theta(0.0).theta == 0.0
    # about half of the nodes lie below the scale
    assert 0.35 < np.mean(mesh.nodes < mesh.scale) < 0.65


@pytest.mark.parametrize("bad", [
    lambda: tangent_mapped_mesh(4, 100.0),
    lambda: tangent_mapped_mesh(40, -1.0),
    lambda: rational_mapped_mesh(40, 100.0, 50.0),
    lambda: tangent_mapped_mesh(40, 100.0, theta=np.pi / 4),
    lambda: gauss_legendre(0),
    lambda: gauss_legendre(3, 1.0, 0.0),
])
def test_mesh_errors(bad):
    with pytest.raises(DomainError):
        bad()


def test_radial_grid():
    g = radial_grid(20.0, 50)
    assert np.sum(g.weights) == pytest.approx(20.0)
    assert g.r_max == pytest.approx(20.0, rel=1e-2)


@pytest.mark.parametrize("L", range(0, 13))
def test_bessel_real_vs_scipy(L):
    z = np.concatenate([np.logspace(-6, -0.5, 30), np.linspace(0.3, 80.0, 300)])
    assert np.allclose(sph_bessel_j(L, z), spherical_jn(L, z), rtol=1e-11, atol=1e-300)


@given(st.integers(0, 12), st.floats(1e-4, 60.0), st.floats(-0.78, 0.78))
def test_bessel_complex_vs_mpmath(L, r, phi):
    z = r * np.exp(1j * phi)
    ref = complex(mp.sqrt(mp.pi / (2 * mp.mpc(z))) * mp.besselj(L + 0.5, mp.mpc(z)))
    got = sph_bessel_j(L, np.array([z]))[0]
    assert abs(got - ref) <= 1e-10 * abs(ref) + 1e-300


def test_bessel_errors():
    with pytest.raises(DomainError):
        sph_bessel_j(13, 1.0)
    with pytest.raises(DomainError):
        sph_bessel_j(0, 1000j)


@given(st.integers(0, 12), st.floats(-1, 1))
def test_legendre_vs_scipy(L, x):
    assert legendre_P(L, x) == pytest.approx(eval_legendre(L, x), abs=1e-13)


def test_legendre_range():
    with pytest.raises(DomainError):
        legendre_P(13, 0.0)


def test_muller_polynomial_roots():
    roots = [1.0 + 2.0j, -3.0 + 0.5j, 0.25]
    f = lambda z: np.prod([z - r for r in roots])
    for r in roots:
        z, it = muller(f, r + 0.1 - 0.1j, h=0.05, tol=1e-13)
        assert abs(z - r) < 1e-11 and it < 30


def test_muller_complex_from_real_start():
    z, _ = muller(lambda z: z * z + 1.0, 0.3, tol=1e-13)
    assert abs(abs(z.imag) - 1.0) < 1e-11


def test_muller_failure():
    with pytest.raises(ConvergenceError):
        muller(lambda z: np.exp(z), 0.0, maxiter=5)
