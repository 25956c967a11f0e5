import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import specs
from jacobi_averaging import (
    JacobiError,
    JacobiSpec,
    PeriodicTail,
    PoleGuardError,
    build_finite_operator,
    eigenvalues,
    solve_schrodinger,
    transfer_entries,
    transfer_matrix,
    transfer_product,
)
from jacobi_averaging.core import CallbackTail, tail_from_dict


def test_spec_validation():
    with pytest.raises(JacobiError):
        JacobiSpec([])
    with pytest.raises(JacobiError):
        JacobiSpec([0.0, 1.0], [1.0, 1.0])
    with pytest.raises(JacobiError):
        JacobiSpec([0.0, 1.0], [-1.0])
    with pytest.raises(JacobiError):
        JacobiSpec([np.nan])


def test_spec_arrays_are_read_only():
    spec = JacobiSpec([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        spec.potentials[0] = 5.0
    assert np.all(spec.hoppings == 1)


def test_boundary_angles_shift_diagonal():
    spec = JacobiSpec([0.5, -0.5, 1.0], [1.5, 0.7], alpha=0.3, beta=1.1)
    H = build_finite_operator(spec)
    assert np.allclose(H, H.T)
    assert H[0, 0] == pytest.approx(0.5 + np.tan(0.3))
    assert H[2, 2] == pytest.approx(1.0 + 1 / np.tan(1.1))
    assert H[0, 1] == 1.5


def test_pole_guard():
    with pytest.raises(PoleGuardError):
        build_finite_operator(JacobiSpec([0.0], alpha=np.pi / 2))
    with pytest.raises(PoleGuardError):
        build_finite_operator(JacobiSpec([0.0], beta=np.pi + 1e-9))


@given(t=st.floats(0.1, 10), v=st.floats(-5, 5), x=st.floats(-5, 5), y=st.floats(0, 3))
def test_single_step_is_unimodular(t, v, x, y):
    assert abs(transfer_matrix(t, v, complex(x, y)).det - 1) < 1e-12 * max(1, t, 1 / t) ** 2


def test_transfer_product_matches_entries(rng):
    spec = JacobiSpec(rng.uniform(-1, 1, 7), rng.uniform(0.5, 2, 6))
    z = 0.3 + 0.2j
    T = transfer_product(spec, z, 7)
    assert np.allclose([T.a, T.b, T.c, T.d], transfer_entries(spec, z))
    assert abs(T.det - 1) < 1e-12
    assert transfer_product(spec, z, 3, 3) == transfer_product(spec, z, 0)
    # splitting the product at an inner site
    assert np.allclose((transfer_product(spec, z, 7, 4) @ transfer_product(spec, z, 4)).matrix,
                       T.matrix)


@settings(max_examples=50, deadline=None)
@given(specs())
def test_eigenvalues_match_dense(spec):
    assert np.allclose(eigenvalues(spec), np.linalg.eigvalsh(build_finite_operator(spec)),
                       atol=1e-10)


@settings(max_examples=50, deadline=None)
@given(specs())
def test_upper_left_entry_vanishes_on_spectrum(spec):
    # a(E) is proportional to det(E - H) for Dirichlet ends
    for E in eigenvalues(spec):
        a = transfer_entries(spec, E)[0]
        scale = np.prod(np.maximum(1, np.abs(E) + 2 + np.abs(spec.potentials)))
        assert abs(a) < 1e-10 * scale


def test_wavefunction_solves_recurrence(rng):
    spec = JacobiSpec(rng.uniform(-1, 1, 6), rng.uniform(0.5, 2, 5))
    z = 0.4 + 0.1j
    wf = solve_schrodinger(spec, z)
    H = build_finite_operator(spec)
    phi = wf.phi
    resid = H @ phi[1:7] - z * phi[1:7]
    # only the last row sees phi_{N+1}; phi_0 = sin(0) = 0
    assert np.allclose(resid[:-1], 0, atol=1e-12)
    assert resid[-1] == pytest.approx(-phi[7])
    assert np.allclose(wf.pairs()[0], [1, 0])


def test_pairs_follow_transfer_matrix(rng):
    spec = JacobiSpec(rng.uniform(-1, 1, 5), rng.uniform(0.5, 2, 4))
    wf = solve_schrodinger(spec, 0.7, alpha=0.4)
    T = transfer_product(spec, 0.7, 5)
    assert np.allclose(wf.pairs()[5], T @ np.array([np.cos(0.4), np.sin(0.4)]))


def test_tail_extension_and_resizing():
    tail = PeriodicTail((1.0, 2.0), (0.5, -0.5), offset=3)
    spec = JacobiSpec([1.0, 2.0, 3.0], [0.7, 0.8], tail=tail)
    t, v = spec.coefficients(7)
    assert np.allclose(t, [1, 0.7, 0.8, 1, 2, 1, 2])
    assert np.allclose(v, [1, 2, 3, 0.5, -0.5, 0.5, -0.5])
    small = spec.resized(2)
    assert small.size == 2
    t2, v2 = small.coefficients(7)
    assert np.allclose(t2, t) and np.allclose(v2, v)


def test_tail_serialization():
    tail = PeriodicTail((1.0,), (0.25,), offset=2)
    assert tail_from_dict(tail.to_dict()) == tail
    with pytest.raises(JacobiError):
        CallbackTail(lambda n: (1.0, 0.0)).to_dict()
    with pytest.raises(JacobiError):
        tail_from_dict({"kind": "quasi"})


def test_free_laplacian_spectrum():
    N = 9
    ev = eigenvalues(JacobiSpec.free(N))
    exact = 2 * np.cos(np.pi * np.arange(N, 0, -1) / (N + 1))
    assert np.allclose(ev, exact)
