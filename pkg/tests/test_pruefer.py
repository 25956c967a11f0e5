import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import specs
from jacobi_averaging import (
    JacobiError,
    JacobiSpec,
    alpha_average_inverse_R2,
    carmona_density,
    carmona_window_integrals,
    eigenvalues,
    modified_map,
    modified_pruefer_flow,
    phase_derivative,
    propagate,
    pruefer_flow,
    pruefer_phase,
    solve_schrodinger,
    sturm_count,
    transfer_entries,
)
from jacobi_averaging.checks import fd_phase_derivative


def test_flow_matches_recurrence(rng):
    spec = JacobiSpec(rng.uniform(-1, 1, 8), rng.uniform(0.5, 2, 7))
    flow = pruefer_flow(spec, 0.4, alpha=0.3)
    pairs = solve_schrodinger(spec, 0.4, alpha=0.3).pairs().real
    r = np.hypot(pairs[:, 0], pairs[:, 1])
    assert np.allclose(flow.radius, r)
    ang = np.arctan2(pairs[:, 1], pairs[:, 0])
    assert np.allclose(np.exp(1j * flow.theta), np.exp(1j * ang))
    # increments stay in (-pi/2, 3pi/2)
    inc = np.diff(flow.theta)
    assert np.all(inc > -np.pi / 2) and np.all(inc < 3 * np.pi / 2)
    state = flow[3]
    assert state.site == 3 and state.radius == pytest.approx(r[3])


def test_radius_renormalisation_survives_long_chains():
    spec = JacobiSpec.free(1)
    _, logr = pruefer_phase(spec, 3.0, n=5000)
    # growth rate arccosh(3/2) per site
    assert logr / 5000 == pytest.approx(np.arccosh(1.5), rel=1e-3)


@settings(max_examples=100, deadline=None)
@given(specs(), st.floats(-4, 4))
def test_sturm_count(spec, E):
    ev = eigenvalues(spec)
    if np.min(np.abs(ev - E)) < 1e-9:
        return
    assert sturm_count(spec, E) == np.sum(ev < E)


def test_phase_decreases_in_energy(rng):
    spec = JacobiSpec(rng.uniform(-1, 1, 10))
    E = np.linspace(-3, 3, 301)
    theta, _ = pruefer_phase(spec, E)
    assert np.all(np.diff(theta) < 0)


@settings(max_examples=40, deadline=None)
@given(specs(), st.floats(-3, 3))
def test_alpha_average_is_one(spec, E):
    assert alpha_average_inverse_R2(spec, E) == pytest.approx(1.0, abs=1e-8)


def test_alpha_average_against_trapezoid(rng):
    # independent oracle: periodic trapezoid over the seed angle, R from the flow
    spec = JacobiSpec(rng.uniform(-1, 1, 6), rng.uniform(0.7, 1.4, 5))
    al = np.linspace(0, np.pi, 4096, endpoint=False)
    for E in (-1.0, 0.2, 1.7):
        t, v = spec.coefficients()
        _, logr = propagate(t, v, E, al)
        trap = np.mean(np.exp(-2 * logr))
        assert trap == pytest.approx(alpha_average_inverse_R2(spec, E), abs=1e-9)


def test_phase_derivatives_match_extended_precision_differences(rng):
    for _ in range(10):
        spec = JacobiSpec(rng.uniform(-1.5, 1.5, 10), rng.uniform(0.5, 2, 9))
        E, al = rng.uniform(-2.5, 2.5), rng.uniform(-1, 1)
        for wrt in ("energy", 4):
            exact = phase_derivative(spec, E, wrt=wrt, alpha=al)
            fd = fd_phase_derivative(spec, E, wrt, alpha=al)
            assert exact == pytest.approx(fd, rel=1e-6)
    with pytest.raises(JacobiError):
        phase_derivative(spec, 0.0, wrt=11)


def test_modified_map_properties():
    for E in (-1.7, -0.3, 0.0, 1.2):
        mp = modified_map(E)
        th = np.linspace(-7, 7, 2001)
        assert np.allclose(mp(th + np.pi), mp(th) + np.pi)
        assert -np.pi <= mp(0.0) < np.pi
        assert np.allclose(mp.inverse(mp(th)), th)
        # continuity of the lift and derivative against differences
        assert np.all(np.diff(mp(th)) > 0)
        h = 1e-6
        assert np.allclose((mp(th + h) - mp(th - h)) / (2 * h), mp.derivative(th), rtol=1e-6)
        c1, c2 = mp.bounds
        assert 0 < c1 <= c2 < np.inf
        assert np.linalg.det(mp.matrix) == pytest.approx(1.0)
    with pytest.raises(JacobiError):
        modified_map(2.0)


def test_free_modified_flow_rotates_rigidly():
    for E in (-1.5, 0.0, 0.7):
        flow = modified_pruefer_flow(JacobiSpec.free(200), E, alpha=0.2)
        assert np.allclose(np.diff(flow.theta_hat), flow.k, atol=1e-12, rtol=0)
        # modified radius is conserved by a rotation
        assert np.ptp(flow.log_radius_hat) < 1e-10


def test_modified_radius_is_norm_of_modified_vector(rng):
    spec = JacobiSpec(rng.uniform(-0.5, 0.5, 6))
    E = 0.3
    flow = modified_pruefer_flow(spec, E)
    a, b, c, d = transfer_entries(spec, E)
    vec = modified_map(E).matrix @ np.array([a, c])
    assert np.exp(flow.log_radius_hat[-1]) == pytest.approx(np.hypot(*vec))
    assert flow.theta_hat[-1] % (2 * np.pi) == pytest.approx(np.arctan2(vec[1], vec[0]) % (2 * np.pi))


def test_carmona_windows_free_laplacian():
    spec = JacobiSpec.free(1)
    centers = np.linspace(-1.5, 1.5, 7)
    windows = np.stack([centers - 0.1, centers + 0.1], axis=1)
    got = carmona_window_integrals(spec, windows, 500)
    exact = np.sqrt(4 - centers**2) / (2 * np.pi) * 0.2
    assert np.max(np.abs(got - exact)) < 2e-3


def test_carmona_density_meta():
    est = carmona_density(JacobiSpec.free(1), np.linspace(-1, 1, 5), 200,
                          windows=[[-0.5, -0.3], [0.3, 0.5]])
    assert est.method == "carmona" and est.truncation == 200
    assert set(est.meta) >= {"window_integrals", "window_integrals_2n", "max_change_n_2n", "stable"}
    assert np.all(est.values >= 0)
