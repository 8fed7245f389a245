import math

import numpy as np
import pytest

from activerods import (ConfigurationError, ModelParams,
                        NumericalFailureError, ParticleEnsemble, PhaseField,
                        build_phi_grid, build_y_grid, em_step, histogram,
                        norms, run_particles, sample_initial, tv_distance)

from conftest import const, shifted_sine


def _drift_params(T=2.0):
    return ModelParams(epsilon=0.0, D=0.0, T=T, V=const(1.0), Phi=const(1.0),
                       allow_zero_epsilon=True)


def test_bitwise_determinism():
    params = ModelParams(epsilon=0.05, D=0.2, T=1.0, V=shifted_sine(1.0, 0.5),
                         Phi=const(1.0))
    a = run_particles(sample_initial(2000, 42, 8.0), params, 0.01, 0.3)
    b = run_particles(sample_initial(2000, 42, 8.0), params, 0.01, 0.3)
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.phi, b.phi)
    c = run_particles(sample_initial(2000, 43, 8.0), params, 0.01, 0.3)
    assert np.any(c.y != a.y)


def test_split_run_matches_single_run():
    params = ModelParams(epsilon=0.05, D=0.2, T=1.0, V=shifted_sine(1.0, 0.5),
                         Phi=const(1.0))
    e0 = sample_initial(2000, 42, 8.0)
    single = run_particles(e0, params, 0.01, 0.1)
    half = run_particles(e0, params, 0.01, 0.05)
    split = run_particles(half, params, 0.01, 0.05)
    np.testing.assert_array_equal(split.y, single.y)
    np.testing.assert_array_equal(split.phi, single.phi)
    assert split.step == single.step == 10


def test_noiseless_drift_exact():
    n = 16
    e = ParticleEnsemble(y=np.full(n, 1.0), phi=np.linspace(0, 6, n), n=n,
                         seed=5)
    params = _drift_params()
    out = run_particles(e, params, 0.01, 0.4)
    np.testing.assert_allclose(out.y, 0.6, atol=1e-10)
    np.testing.assert_allclose(
        out.phi, np.mod(np.linspace(0, 6, n) + 0.4, 2.0 * math.pi),
        atol=1e-10)


def test_noiseless_drift_sticks_at_wall():
    # wall folding pins a noiseless inward drifter within one step of 0
    n = 8
    e = ParticleEnsemble(y=np.full(n, 1.0), phi=np.zeros(n), n=n, seed=5)
    out = run_particles(e, _drift_params(), 0.01, 1.3)
    assert np.all(out.y >= 0.0)
    assert np.all(out.y <= 0.01 + 1e-12)


def test_mean_decrement_matches_mean_speed():
    n = 100_000
    dt = 0.01
    params = ModelParams(epsilon=0.0, D=0.0, T=1.0, V=shifted_sine(1.0, 0.5),
                         Phi=const(0.0), allow_zero_epsilon=True)
    e0 = sample_initial(n, 77, 8.0)
    e0 = ParticleEnsemble(y=np.full(n, 4.0), phi=e0.phi, n=n, seed=77)
    e1 = em_step(e0, params, dt)
    drop = float(np.mean(e0.y - e1.y))
    # E[V] = 1.5 under the uniform angle law; 3 sigma monte carlo band
    sigma = 0.5 / math.sqrt(2.0) * dt / math.sqrt(n)
    assert abs(drop - 1.5 * dt) <= 3.0 * sigma + 3.0 * dt / math.sqrt(n)


def test_histogram_mass_and_single_cell():
    yg = build_y_grid(4.0, 48, 0.4, 16)
    pg = build_phi_grid(16)
    n = 500
    e = ParticleEnsemble(y=np.full(n, 0.11), phi=np.zeros(n), n=n, seed=1)
    h = histogram(e, yg, pg)
    assert norms(h)["mass"] == pytest.approx(1.0, rel=1e-12)
    dens = np.zeros((48, 16))
    dens[4, 0] = 1.0 / (yg.widths[4] * pg.h)
    np.testing.assert_allclose(h.values, dens, rtol=1e-12)


def test_histogram_flat_angle_marginal():
    yg = build_y_grid(8.0, 48, 0.4, 16)
    pg = build_phi_grid(16)
    e = sample_initial(100_000, 2024, 8.0)
    h = histogram(e, yg, pg)
    marginal = np.sum(h.values * yg.widths[:, None], axis=0)
    assert np.max(np.abs(marginal * 2.0 * math.pi - 1.0)) <= 0.05


def test_histogram_needs_particles_inside():
    yg = build_y_grid(4.0, 48, 0.4, 16)
    pg = build_phi_grid(8)
    e = ParticleEnsemble(y=np.full(10, 10.0), phi=np.zeros(10), n=10, seed=1)
    with pytest.raises(NumericalFailureError):
        histogram(e, yg, pg)


def test_tv_distance_cases():
    yg = build_y_grid(4.0, 48, 0.4, 16)
    pg = build_phi_grid(8)
    vol00 = yg.widths[0] * pg.h
    a = np.zeros((48, 8))
    a[0, 0] = 1.0 / vol00
    b = np.zeros((48, 8))
    b[5, 3] = 1.0 / (yg.widths[5] * pg.h)
    fa = PhaseField(a, yg, pg)
    fb = PhaseField(b, yg, pg)
    assert tv_distance(fa, fa) == 0.0
    assert tv_distance(fa, fb) == pytest.approx(1.0, rel=1e-12)
    doubled = PhaseField(2.0 * a, yg, pg)
    with pytest.raises(NumericalFailureError):
        tv_distance(fa, doubled)


def test_reflection_keeps_domain():
    params = ModelParams(epsilon=0.5, D=0.2, T=1.0, V=shifted_sine(1.0, 0.5),
                         Phi=const(1.0))
    e = run_particles(sample_initial(5000, 9, 2.0), params, 0.01, 0.5,
                      y_max=2.0)
    assert np.all(e.y >= 0.0)
    assert np.all(e.y <= 2.0)
    assert np.all((e.phi >= 0.0) & (e.phi < 2.0 * math.pi))


def test_em_step_dt_bound():
    e = sample_initial(100, 3, 8.0)
    params = _drift_params()
    with pytest.raises(ConfigurationError):
        em_step(e, params, 0.2)


def test_ensemble_shape_check():
    with pytest.raises(ConfigurationError):
        ParticleEnsemble(y=np.zeros(5), phi=np.zeros(4), n=5, seed=1)
