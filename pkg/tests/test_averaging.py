import numpy as np
import pytest

from jacobi_averaging import (
    JacobiError,
    JacobiSpec,
    PerturbationW,
    ResonanceError,
    birman_schwinger,
    certify_theorem_conditions,
    crossing_mus,
    eigenvalue_crossings,
    eigenvalues,
    one_parameter_averaged_density,
    perturbed,
    phase_crossing_count,
    phase_derivative,
    pruefer_phase,
)


def test_perturbation_validation():
    with pytest.raises(JacobiError):
        PerturbationW([1.0, -0.5])
    W = PerturbationW([0.0, 1.0, 0.0, 2.0, 3.0])
    assert not W.strictly_positive
    assert W.adjacent_pair == 4
    assert PerturbationW([1.0, 0.0, 1.0]).adjacent_pair is None


def test_perturbed_adds_to_first_sites():
    base = JacobiSpec([0.1, 0.2, 0.3])
    spec = perturbed(base, [1.0, 2.0], 0.5)
    assert np.allclose(spec.potentials, [0.6, 1.2, 0.3])
    with pytest.raises(JacobiError):
        perturbed(base, np.ones(4), 1.0)


def test_two_site_example():
    K, lam = birman_schwinger(JacobiSpec.free(2), [1.0, 1.0], 0.0)
    assert np.allclose(K, -np.array([[0, 1], [1, 0]]))
    assert np.allclose(lam, [-1, 1])
    with pytest.raises(ResonanceError):
        birman_schwinger(JacobiSpec.free(2), [1.0, 1.0], 1.0)


def test_duality(rng):
    for _ in range(20):
        N = int(rng.integers(1, 7))
        base = JacobiSpec(rng.uniform(-1, 1, N), rng.uniform(0.5, 1.5, N - 1))
        W = rng.uniform(0.2, 2, N)
        E = rng.uniform(-2, 2)
        for mu in crossing_mus(base, W, E):
            assert np.min(np.abs(eigenvalues(perturbed(base, W, mu)) - E)) < 1e-8


def test_brent_crossings_agree_with_duality(rng):
    base = JacobiSpec(rng.uniform(-1, 1, 4))
    W = np.array([1.0, 0.5, 2.0, 1.5])
    E = 0.37
    mus = crossing_mus(base, W, E)
    found = eigenvalue_crossings(base, W, E, -5, 5)
    inside = mus[(mus > -5) & (mus < 5)]
    assert np.allclose(sorted(mu for _, mu in found), inside, atol=1e-8)


def test_phase_crossing_count():
    h = np.pi / 2
    assert phase_crossing_count(0.0, 1.0) == 0
    assert phase_crossing_count(0.0, 2.0) == 1
    assert phase_crossing_count(2.0, 0.0) == 1
    assert phase_crossing_count(-h - 0.1, 3 * h + 0.1) == 3
    assert phase_crossing_count(h, h + 1) == 0


def test_phase_is_monotone_in_coupling(rng):
    base = JacobiSpec(rng.uniform(-1, 1, 6))
    W = np.array([0.0, 1.0, 1.0, 0.0, 0.3, 0.0])
    E = 0.4
    mus = np.sort(rng.uniform(-3, 3, 100))
    theta = np.array([pruefer_phase(perturbed(base, W, mu), E)[0] for mu in mus])
    assert np.all(np.diff(theta) > 0)
    # derivative in mu is the w-weighted sum of site derivatives
    for mu in mus[:10]:
        spec = perturbed(base, W, mu)
        d = sum(w * phase_derivative(spec, E, wrt=n + 1) for n, w in enumerate(W) if w)
        assert d > 0


def test_certification_of_two_site_example():
    base = JacobiSpec.free(2)
    good = certify_theorem_conditions(base, [1.0, 1.0], 0.0, -1.5, 1.5)
    assert good.condition_a and good.condition_b and good.certified
    assert good.rotation_exceeds_pi
    bad = certify_theorem_conditions(base, [1.0, 1.0], 0.0, 2.0, 3.0)
    assert not bad.condition_a and bad.condition_b is False and not bad.certified
    res = certify_theorem_conditions(base, [1.0, 1.0], 1.0, -1.5, 1.5)
    assert res.condition_b is None and res.notes


def test_one_parameter_density():
    base = JacobiSpec.free(2)
    E = np.linspace(-1.8, 1.8, 7)
    est = one_parameter_averaged_density(base, [1.0, 1.0], -1.0, 1.0, E, 200, certify=False)
    assert np.all(est.values >= 0) and np.all(est.values > 0)
    assert est.meta["max_ratio_L_2L"] >= 1.0
    zero = one_parameter_averaged_density(base, [1.0, 1.0], 0.5, 0.5, E, 50, monitor=False,
                                          certify=False)
    assert np.all(zero.values == 0)
