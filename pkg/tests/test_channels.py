import numpy as np
import pytest

from entangled_sensing.channels import (DisplacementChannel, estimate_all_components, make_rng,
                                        measure_weighted, phase_to_displacement, sample_weighted,
                                        spawn_rngs, trial_seeds, unit_weights)
from entangled_sensing.noise import ProbeScheme, entangled_precision, separable_precision


def test_channel_validation_and_equality():
    ch = DisplacementChannel([0.1, -0.2])
    assert ch.n_modes == 2 and ch.transmissivity == 1.0
    assert ch == DisplacementChannel(np.array([0.1, -0.2]))
    assert hash(ch) == hash(DisplacementChannel([0.1, -0.2]))
    with pytest.raises(ValueError):
        DisplacementChannel([])
    with pytest.raises(ValueError):
        DisplacementChannel([np.nan])
    with pytest.raises(ValueError):
        DisplacementChannel([1.0], transmissivity=1.5)
    with pytest.raises(ValueError):
        ch.displacements[0] = 3.0


def test_unit_weights():
    unit_weights([0.6, 0.8])
    with pytest.raises(ValueError):
        unit_weights([1.0, 1.0])


def test_measure_weighted_shapes_and_scheme_checks(rng):
    ch = DisplacementChannel([0.3, 0.4, 0.0])
    out = measure_weighted(ch, [1.0, 0.0, 0.0], ProbeScheme.entangled(2.0), rng)
    assert isinstance(out.value, float)
    with pytest.raises(ValueError):
        measure_weighted(ch, [1.0, 0.0], ProbeScheme.entangled(2.0), rng)
    with pytest.raises(ValueError):
        measure_weighted(ch, [1.0, 0.0, 0.0], ProbeScheme.separable([1.0, 1.0]), rng)
    with pytest.raises(TypeError):
        measure_weighted(ch, [1.0, 0.0, 0.0], "entangled", rng)


def test_noiseless_limit_returns_exact_average(rng):
    alpha = np.array([[0.3, -0.1], [1.0, 2.0]])
    w = np.array([0.6, 0.8])
    f = sample_weighted(alpha, w, ProbeScheme.entangled(np.inf), 1.0, rng)
    np.testing.assert_allclose(f, alpha @ w, rtol=0, atol=1e-15)


@pytest.mark.parametrize("scheme, eta", [
    (ProbeScheme.entangled(3.0), 1.0),
    (ProbeScheme.entangled(0.5), 0.7),
    (ProbeScheme.separable([2.0, 1.0]), 0.9),
])
def test_sample_moments(scheme, eta, rng):
    w = np.array([0.6, -0.8])
    alpha = np.tile([1.0, 0.5], (200_000, 1))
    f = sample_weighted(alpha, w, scheme, eta, rng, scale=2.0)
    expected_sd = 2.0 * scheme.precision(w, eta)
    assert f.std() == pytest.approx(expected_sd, rel=0.01)
    assert f.mean() == pytest.approx(2.0 * (alpha[0] @ w), abs=5 * expected_sd / np.sqrt(f.size))


def test_estimate_all_components(rng):
    ch = DisplacementChannel([1.0, -1.0, 0.5], transmissivity=0.8)
    scheme = ProbeScheme.separable([0.0, 1.0, 4.0])
    est = np.array([estimate_all_components(ch, scheme, rng) for _ in range(40_000)])
    for m, n in enumerate(scheme.allocation):
        e = np.zeros(3)
        e[m] = 1.0
        assert est[:, m].std() == pytest.approx(separable_precision(e, scheme.allocation, 0.8), rel=0.02)
    with pytest.raises(ValueError):
        estimate_all_components(ch, ProbeScheme.entangled(1.0), rng)


def test_rng_streams_are_reproducible():
    assert make_rng(7).random() == make_rng(7).random()
    g = make_rng(3)
    assert make_rng(g) is g
    a = [r.random() for r in spawn_rngs(1, 3)]
    b = [r.random() for r in spawn_rngs(1, 3)]
    assert a == b and len(set(a)) == 3
    assert trial_seeds(5, 4) == trial_seeds(5, 4)
    assert trial_seeds(5, 2) == trial_seeds(5, 4)[:2]
    assert isinstance(make_rng(7).bit_generator, np.random.PCG64)


def test_phase_to_displacement():
    assert phase_to_displacement(0.01, 100.0) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        phase_to_displacement(0.1, -1.0)


def test_entangled_precision_used_by_sampler(rng):
    w = np.ones(4) / 2
    f = sample_weighted(np.zeros((100_000, 4)), w, ProbeScheme.entangled(5.0), 1.0, rng)
    assert f.std() == pytest.approx(entangled_precision(5.0), rel=0.01)
