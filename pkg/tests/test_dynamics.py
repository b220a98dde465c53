import numpy as np
import pytest

from mleqc.dynamics import (
    ControlField,
    Envelope,
    FieldComponent,
    ModelSystem,
    default_dt,
    field_value,
    na2_model,
    omega_max,
    propagate,
    propagate_population,
)

ENERGIES = [0.0, 0.0007250238, 0.066889653, 0.067424216]


def two_level(gap=0.066889653):
    return ModelSystem(
        level_energies=np.array([0.0, gap]),
        dipole_matrix=np.array([[0.0, 1.0], [1.0, 0.0]]),
    )


def test_na2_model_energies_and_gaps(system):
    assert np.allclose(system.level_energies, ENERGIES)
    gaps = system.transition_gaps()
    # ordered as the dipole-coupled pairs (1,3), (1,4), (2,3), (2,4)
    assert np.allclose(
        gaps, [0.066889653, 0.067424216, 0.066164629, 0.066699192], atol=1e-15
    )
    assert system.spectral_spread() == pytest.approx(0.067424216)


def test_na2_dipole_pattern(system):
    mu = system.dipole_matrix
    assert np.allclose(mu, mu.T)
    assert np.allclose(np.diag(mu), 0)
    assert np.allclose(mu[:2, :2], 0), "no intra-surface coupling"
    assert np.allclose(mu[2:, 2:], 0)
    assert np.allclose(mu[:2, 2:], 1)


def test_model_system_validation():
    with pytest.raises(ValueError):
        ModelSystem(np.array([0.0, 1.0]), np.array([[0.0, 1.0], [0.5, 0.0]]))
    with pytest.raises(ValueError):
        ModelSystem(np.array([0.0, 1.0]), np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_envelope_gaussian_shape():
    env = Envelope("gaussian", center=100.0, fwhm=40.0)
    assert env(100.0) == pytest.approx(1.0)
    assert env(120.0) == pytest.approx(0.5)  # half maximum at fwhm/2
    assert env(80.0) == pytest.approx(0.5)


def test_envelope_flat_and_validation():
    flat = Envelope("flat")
    assert np.all(flat(np.linspace(0, 9, 10)) == 1.0)
    with pytest.raises(ValueError):
        Envelope("boxcar")
    with pytest.raises(ValueError):
        Envelope("gaussian")  # center/fwhm required


def test_control_field_template(system):
    f = ControlField.template(system)
    assert f.t_final == 2e4
    assert np.allclose(f.amplitudes(), 0)
    assert np.allclose(f.frequencies(), system.transition_gaps())
    assert f.envelope.kind == "gaussian"
    assert f.envelope.center == pytest.approx(1e4)
    assert f.envelope.fwhm == pytest.approx(1e4)


def test_field_value_and_domain():
    env = Envelope("flat")
    f = ControlField(env, (FieldComponent(0.01, 0.05, 0.0),), 100.0)
    assert field_value(f, 0.0) == pytest.approx(0.01)
    t = 37.0
    assert field_value(f, t) == pytest.approx(0.01 * np.cos(0.05 * t))
    with pytest.raises(ValueError):
        field_value(f, -1.0)
    with pytest.raises(ValueError):
        field_value(f, 101.0)


def test_omega_max_includes_field_carriers(system):
    env = Envelope("flat")
    slow = ControlField(env, (FieldComponent(0.001, 0.01, 0.0),), 1e3)
    fast = ControlField(env, (FieldComponent(0.001, 0.1, 0.0),), 1e3)
    assert omega_max(system, slow) == pytest.approx(system.spectral_spread())
    assert omega_max(system, fast) == pytest.approx(0.1)
    assert default_dt(system, slow) == pytest.approx(2 * np.pi / system.spectral_spread() / 40)


def test_zero_field_propagation_is_free_evolution(system):
    f = ControlField.template(system, t_final=500.0)
    res = propagate(system, f)
    expected = np.diag(np.exp(-1j * np.asarray(ENERGIES) * 500.0))
    assert np.max(np.abs(res.u_final.matrix - expected)) < 1e-14
    assert res.unitarity_defect < 1e-12


def test_propagate_rejects_coarse_dt(system):
    f = ControlField.template(system, t_final=1e3)
    limit = 2 * np.pi / system.spectral_spread() / 20
    with pytest.raises(ValueError, match="omega_max"):
        propagate(system, f, dt=limit * 1.1)
    # exactly at the limit is allowed
    propagate(system, f, dt=limit)


def test_num_steps_covers_span(system):
    f = ControlField.template(system, t_final=1e3)
    res = propagate(system, f, dt=1.0)
    assert res.num_steps == 1000
    res2 = propagate(system, f, dt=0.9999)
    assert res2.num_steps == 1001


def test_rabi_oracle_two_level():
    """Resonant weak drive follows the rotating-wave Rabi transfer to 1e-3.

    With H = H0 - a cos(wt) mu and unit dipole element the rotating-wave
    coupling is a/2, so the transfer probability is sin^2(a t / 2).
    """
    sys2 = two_level()
    a = 5e-5
    t_final = 4e4
    f = ControlField(
        Envelope("flat"),
        (FieldComponent(a, sys2.spectral_spread(), 0.0),),
        t_final,
    )
    dt = 2 * np.pi / sys2.spectral_spread() / 160
    res = propagate(sys2, f, dt=dt)
    p_transfer = abs(res.u_final.matrix[1, 0]) ** 2
    assert p_transfer == pytest.approx(np.sin(a * t_final / 2) ** 2, abs=1e-3)


def test_step_halving_second_order(system):
    comps = (
        FieldComponent(0.005, 0.066889653, 0.3),
        FieldComponent(0.003, 0.067424216, 1.1),
    )
    f = ControlField(Envelope("gaussian", center=1e3, fwhm=1e3), comps, 2e3)
    dt = default_dt(system, f)
    u_ref = propagate(system, f, dt=dt / 4).u_final.matrix
    e1 = np.linalg.norm(propagate(system, f, dt=dt).u_final.matrix - u_ref)
    e2 = np.linalg.norm(propagate(system, f, dt=dt / 2).u_final.matrix - u_ref)
    # halving dt should cut the error by ~4 (midpoint rule is second order);
    # the quarter-step reference biases the ratio toward 5 = (16-1)/(4-1)
    assert 2.5 < e1 / e2 < 10.0


def test_time_slicing_composes(system):
    comps = (FieldComponent(0.004, 0.0669, 0.0),)
    f = ControlField(Envelope("gaussian", center=500.0, fwhm=600.0), comps, 1e3)
    dt = 1.0
    full = propagate(system, f, dt=dt).u_final.matrix
    first = propagate(system, f, dt=dt, t_start=0.0, t_end=400.0).u_final.matrix
    second = propagate(system, f, dt=dt, t_start=400.0, t_end=1e3).u_final.matrix
    assert np.max(np.abs(second @ first - full)) < 1e-12


def test_population_path_matches_exact(system):
    rng = np.random.default_rng(6)
    amps = rng.random((2, 4)) * 0.008
    phases = rng.random((2, 4)) * 2 * np.pi
    freqs = np.tile(system.transition_gaps(), (2, 1))
    env = Envelope("gaussian", center=5e3, fwhm=5e3)
    dt = 2 * np.pi / system.spectral_spread() / 40
    batch = propagate_population(system, env, amps, phases, freqs, 1e4, dt)
    for i in range(2):
        comps = tuple(
            FieldComponent(amps[i, j], freqs[i, j], phases[i, j]) for j in range(4)
        )
        f = ControlField(env, comps, 1e4)
        exact = propagate(system, f, dt=dt).u_final.matrix
        assert np.max(np.abs(batch[i] - exact)) < 1e-9


def test_population_path_unitarity_and_determinism(system):
    rng = np.random.default_rng(7)
    amps = rng.random((3, 4)) * 0.01
    phases = rng.random((3, 4)) * 2 * np.pi
    freqs = np.tile(system.transition_gaps(), (3, 1))
    env = Envelope("gaussian", center=1e4, fwhm=1e4)
    dt = 2 * np.pi / system.spectral_spread() / 160
    u1 = propagate_population(system, env, amps, phases, freqs, 2e4, dt)
    u2 = propagate_population(system, env, amps, phases, freqs, 2e4, dt)
    assert np.array_equal(u1, u2)
    for u in u1:
        assert np.linalg.norm(u.conj().T @ u - np.eye(4)) < 1e-8


def test_population_path_fixed_eps_max_stays_consistent(system):
    amps = np.full((1, 4), 0.002)
    phases = np.zeros((1, 4))
    freqs = system.transition_gaps()[None, :]
    env = Envelope("gaussian", center=2.5e3, fwhm=2.5e3)
    dt = 2 * np.pi / system.spectral_spread() / 40
    auto = propagate_population(system, env, amps, phases, freqs, 5e3, dt)
    fixed = propagate_population(
        system, env, amps, phases, freqs, 5e3, dt, eps_max=0.05
    )
    assert np.max(np.abs(auto - fixed)) < 1e-9
