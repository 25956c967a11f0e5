import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from conftest import specs
from jacobi_averaging import (
    JacobiError,
    JacobiSpec,
    SingularEnergyError,
    beta_average_quadrature,
    beta_averaged_density,
    beta_averaged_green,
    build_finite_operator,
    eigenvalues,
    green_boundary,
    green_direct,
    green_from_transfer,
)

zs = st.builds(complex, st.floats(-3, 3), st.floats(0.05, 1.0))


def _dense(spec, z):
    H = build_finite_operator(spec)
    return np.linalg.inv(H - z * np.eye(spec.size))


def test_direct_matches_dense_inverse(rng):
    spec = JacobiSpec(rng.uniform(-1, 1, 6), rng.uniform(0.5, 2, 5), alpha=0.2, beta=1.3)
    z = 0.5 + 0.3j
    G = _dense(spec, z)
    for n, m in [(1, 1), (1, 6), (3, 4), (6, 6)]:
        assert green_direct(spec, z, n, m) == pytest.approx(G[n - 1, m - 1], rel=1e-12)


def test_conjugate_symmetry(rng):
    spec = JacobiSpec(rng.uniform(-1, 1, 4))
    z = -0.4 + 0.6j
    assert green_direct(spec, z.conjugate()) == pytest.approx(np.conj(green_direct(spec, z)))
    g_up = green_from_transfer(spec, z)
    g_dn = green_from_transfer(spec, z.conjugate())
    assert np.allclose(np.conj(g_up), g_dn)


def test_singular_real_energy():
    spec = JacobiSpec.free(3)
    with pytest.raises(SingularEnergyError):
        green_direct(spec, eigenvalues(spec)[1])


@settings(max_examples=60, deadline=None)
@given(specs(), zs)
def test_transfer_identities(spec, z):
    N = spec.size
    g1N, g11, gNN = green_from_transfer(spec, z)
    assert g1N == pytest.approx(green_direct(spec, z, 1, N), rel=1e-9)
    assert g11 == pytest.approx(green_direct(spec, z, 1, 1), rel=1e-9)
    assert gNN == pytest.approx(green_direct(spec, z, N, N), rel=1e-9)


def test_transfer_identities_need_dirichlet():
    with pytest.raises(JacobiError):
        green_from_transfer(JacobiSpec([0.0, 1.0], alpha=0.3), 1j)


@settings(max_examples=60, deadline=None)
@given(specs(), zs, st.floats(-1.3, 1.3), st.floats(0.2, np.pi - 0.2))
def test_boundary_formula(spec, z, alpha, beta):
    bspec = spec.with_boundary(alpha, beta)
    assert green_boundary(bspec, z) == pytest.approx(green_direct(bspec, z), rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(specs(n_max=8), zs, st.floats(-1.3, 1.3))
def test_beta_average_closed_form(spec, z, alpha):
    assert abs(beta_averaged_green(spec, z, alpha) - beta_average_quadrature(spec, z, alpha)) < 1e-8


def test_density_is_boundary_value_of_imaginary_part(rng):
    spec = JacobiSpec(rng.uniform(-1, 1, 5), rng.uniform(0.5, 2, 4))
    for E in (-1.2, 0.1, 0.9):
        eps = 1e-9
        im = beta_averaged_green(spec, E + 1j * eps).imag / np.pi
        assert beta_averaged_density(spec, E) == pytest.approx(im, rel=1e-6)


def test_beta_averaged_measure_has_unit_mass():
    spec = JacobiSpec([0.3, -0.2, 0.5], [1.2, 0.8], alpha=0.4)
    f = lambda e: float(beta_averaged_density(spec, e))
    mass = sum(integrate.quad(f, a, b, limit=400)[0]
               for a, b in [(-np.inf, -4), (-4, 4), (4, np.inf)])
    assert mass == pytest.approx(1.0, abs=1e-8)
