import numpy as np
import pytest

from qomsim.base import DomainError
from qomsim.core import HBAR, GaussianState, MeasurementParams, MechanicalParams
from qomsim.trajectory import (ConditionalSimulation, breathing_scenario, decoherence_horizon, default_initial_state,
                               ensemble_statistics, filter_record, rotate_covariance, simulate_conditional,
                               thermal_spread, three_stage_experiment, unconditional_evolve)
from qomsim.wiener import WienerFilter


class ZeroSource:
    "Increments that are identically zero"

    def increments(self, index, n_steps, n_noises=1):
        return np.zeros((n_steps, n_noises))


def test_noiseless_means_follow_the_oscillator():
    mech = MechanicalParams(1., omega_m=2.)
    meas = MeasurementParams(10.)
    initial = GaussianState.ground_state(mech).with_means(1e-15, 0.)
    record = simulate_conditional(mech, meas, 3., 5e-4, initial=initial, source=ZeroSource())[0]
    np.testing.assert_allclose(record.mean_x, 1e-15 * np.cos(2. * record.t), rtol=1e-9, atol=1e-24)
    alpha = meas.alpha(mech.mass)
    np.testing.assert_allclose(record.dy[:-1], alpha * record.mean_x[:-1] * 5e-4, rtol=1e-12)


def test_records_are_reproducible_and_thread_independent():
    mech = MechanicalParams(1., omega_m=1.)
    meas = MeasurementParams(2., omega_f=0.5)
    one = simulate_conditional(mech, meas, 1., 0.005, seed=9, n_traj=4, n_threads=1)
    three = simulate_conditional(mech, meas, 1., 0.005, seed=9, n_traj=4, n_threads=3)
    for a, b in zip(one, three):
        np.testing.assert_array_equal(a.dy, b.dy)
        np.testing.assert_array_equal(a.mean_p, b.mean_p)
    assert [r.index for r in three] == [0, 1, 2, 3]
    other = simulate_conditional(mech, meas, 1., 0.005, seed=10, n_traj=1)[0]
    assert not np.array_equal(one[0].dy, other.dy)


def test_stride_and_frame():
    mech = MechanicalParams(1., omega_m=1.)
    record = simulate_conditional(mech, MeasurementParams(2.), 1., 0.005, stride=10)[0]
    assert record.t.size == 21
    assert record.t[1] == pytest.approx(0.05)
    frame = record.to_frame()
    assert list(frame.columns) == ['t', 'dy', 'mean_x', 'mean_p', 'v_xx', 'v_xp', 'v_pp']


def test_steady_initial_state_keeps_covariance():
    mech = MechanicalParams(1., omega_m=1.)
    meas = MeasurementParams(2.)
    record = simulate_conditional(mech, meas, 2., 0.005)[0]
    steady = default_initial_state(mech, meas)
    np.testing.assert_allclose(record.v_xx / steady.v_xx, 1., rtol=1e-6)
    np.testing.assert_allclose(record.v_pp / steady.v_pp, 1., rtol=1e-6)


@pytest.mark.parametrize('kwargs', [{'dt': 0.01}, {'force_noise': 'ignored'}, {'hidden': True},
                                    {'stride': 0}, {'duration': 1e-4}])
def test_simulation_input_checks(kwargs):
    mech = MechanicalParams(1., omega_m=1.)
    options = {'duration': 1., 'dt': 0.005}
    options.update(kwargs)
    with pytest.raises(DomainError):
        ConditionalSimulation(mech, MeasurementParams(2.), **options)


def test_no_record_without_measurement():
    with pytest.raises(DomainError):
        simulate_conditional(MechanicalParams(1., omega_m=1.), MeasurementParams(0.), 1., 0.001)


@pytest.mark.slow
def test_total_variance_law():
    # 10 checkpoints after t = 0, sample variances of Gaussian means within 3 sigma
    mech = MechanicalParams(1., omega_m=1.)
    meas = MeasurementParams(2.)
    n_traj = 10000
    records = simulate_conditional(mech, meas, 2.5, 0.005, seed=3, n_traj=n_traj, stride=50)
    stats = ensemble_statistics(records).iloc[1:]
    assert len(stats) == 10
    unconditional = unconditional_evolve(mech, meas.alpha(mech.mass), default_initial_state(mech, meas), 2.5,
                                         t_eval=records[0].t)
    band = 3. * np.sqrt(2. / (n_traj - 1))
    for moment in ('xx', 'pp'):
        spread = getattr(unconditional, 'v_' + moment)[1:] - stats['v_' + moment].to_numpy()
        assert np.all(spread > 0)
        np.testing.assert_array_less(np.abs(stats['var_mean_' + moment[0]].to_numpy() - spread), band * spread)


@pytest.mark.slow
def test_hidden_state_residuals_match_conditional_covariance():
    mech = MechanicalParams(1., omega_m=1.)
    meas = MeasurementParams(3., omega_f=0.5)
    n_traj = 10000
    records = simulate_conditional(mech, meas, 1.6, 0.002, seed=5, n_traj=n_traj, stride=80,
                                   force_noise='filtered', hidden=True)
    stats = ensemble_statistics(records).iloc[1:]
    assert len(stats) == 10
    v_xx, v_xp, v_pp = (stats[c].to_numpy() for c in ('v_xx', 'v_xp', 'v_pp'))
    band = 3. * np.sqrt(2. / n_traj)
    np.testing.assert_array_less(np.abs(stats['residual_xx'].to_numpy() - v_xx), band * v_xx)
    np.testing.assert_array_less(np.abs(stats['residual_pp'].to_numpy() - v_pp), band * v_pp)
    xp_band = 3. * np.sqrt((v_xx * v_pp + v_xp ** 2) / n_traj)
    np.testing.assert_array_less(np.abs(stats['residual_xp'].to_numpy() - v_xp), xp_band)


@pytest.mark.slow
def test_innovations_are_white_with_half_dt_variance():
    mech = MechanicalParams(1., omega_m=1.)
    meas = MeasurementParams(3., omega_f=0.5)
    dt = 5e-4
    records = simulate_conditional(mech, meas, 5., dt, seed=13, n_traj=20, force_noise='filtered', hidden=True)
    alpha = meas.alpha(mech.mass)
    innovations = np.array([r.dy[:-1] - alpha * r.mean_x[:-1] * dt for r in records])
    assert innovations.size >= 100000
    # the residual x - <x> adds alpha^2 V_xx dt^2 to each increment
    expected = dt / 2 + alpha ** 2 * np.array([r.v_xx[:-1] for r in records]) * dt ** 2
    ratio = innovations ** 2 / expected
    assert abs(ratio.mean() - 1.) < 3. * np.sqrt(2. / ratio.size)
    assert abs(innovations.mean()) < 3. * np.sqrt(dt / 2 / innovations.size)
    lagged = np.mean(innovations[:, 1:] * innovations[:, :-1]) / np.mean(innovations ** 2)
    assert abs(lagged) < 3. / np.sqrt(innovations[:, 1:].size)


@pytest.mark.slow
def test_final_means_converge_at_first_order_in_dt():
    # dt, dt/2 and dt/4 runs share one Wiener path through the refined source
    mech = MechanicalParams(1., omega_m=1.)
    meas = MeasurementParams(2.)
    initial = default_initial_state(mech, meas).with_means(1e-17, 0.)
    finals = []
    for refine in (4, 2, 1):
        records = simulate_conditional(mech, meas, 1., 1e-3 * refine, seed=21, n_traj=1000, initial=initial,
                                       refine=refine)
        finals.append(np.array([(r.mean_x[-1], r.mean_p[-1]) for r in records]))
    coarse = np.sqrt(np.mean((finals[0] - finals[1]) ** 2, axis=0))
    fine = np.sqrt(np.mean((finals[1] - finals[2]) ** 2, axis=0))
    assert np.all(fine > 0)
    order = np.log2(coarse / fine)
    assert np.all(order >= 0.9)
    assert np.all(fine < 0.05 * np.std(finals[2], axis=0))


def test_offline_filter_tracks_conditional_mean():
    mech = MechanicalParams(1., omega_m=1.)
    meas = MeasurementParams(5.)
    record = simulate_conditional(mech, meas, 10., 0.001, seed=1)[0]
    s_zz = HBAR / (mech.mass * meas.omega_q ** 2)
    s_ff = HBAR * mech.mass * meas.omega_q ** 2
    estimate = filter_record(record, WienerFilter(mech, s_zz, s_ff), mech, meas)
    assert estimate.size == record.t.size - 1
    mean_x = record.mean_x[:-1]
    rms = np.sqrt(np.mean(mean_x ** 2))
    assert np.sqrt(np.mean((estimate - mean_x) ** 2)) < 0.15 * rms


@pytest.mark.parametrize('omega', [0., 2.])
def test_unconditional_evolution(omega):
    mech = MechanicalParams(1., omega_m=omega)
    alpha = 1. / np.sqrt(HBAR)
    initial = GaussianState(0., 0., HBAR / 2, 0., HBAR / 2)
    final = unconditional_evolve(mech, alpha, initial, 3.)
    rotated = rotate_covariance(initial, mech.mass, omega, 3.)
    added = thermal_spread(mech.mass, omega, HBAR / 2, 3.)
    for value, a, b in zip((final.v_xx, final.v_xp, final.v_pp), rotated, added):
        assert value / (a + b) == pytest.approx(1., rel=1e-7)
    track = unconditional_evolve(mech, alpha, initial, 3., t_eval=np.linspace(0., 3., 7))
    assert track.v_pp.size == 7
    with pytest.raises(DomainError):
        unconditional_evolve(mech, -1., initial, 1.)


def test_thermal_spread_free_limit():
    tau = np.array([0.01, 0.02])
    free = thermal_spread(2., 0., 3., tau)
    slow = thermal_spread(2., 0.5, 3., tau)
    for a, b in zip(free, slow):
        np.testing.assert_allclose(a, b, rtol=1e-3)


def test_rotation_over_a_period():
    state = GaussianState(0., 0., 2., 0.3, 5.)
    period = 2 * np.pi / 3.
    v_xx, v_xp, v_pp = rotate_covariance(state, 1.5, 3., [period / 3, period])
    assert v_xx[1] == pytest.approx(2.) and v_xp[1] == pytest.approx(0.3) and v_pp[1] == pytest.approx(5.)
    assert v_xx[0] * v_pp[0] - v_xp[0] ** 2 == pytest.approx(2. * 5. - 0.3 ** 2)


def test_breathing_scenarios():
    first = breathing_scenario(1, periods=2.4)
    assert first.dips == 5
    assert not first.below_vacuum[0]
    second = breathing_scenario(2)
    assert second.below_vacuum[0]
    assert list(second.to_frame().columns) == ['tau_s', 'delta_x_sq', 'vacuum']
    assert second.v_add_xx > 0
    with pytest.raises(DomainError):
        breathing_scenario(3)


@pytest.mark.parametrize('number, dips', [(1, 9), (2, 4)])
def test_breathing_dips_stop_at_the_decoherence_horizon(number, dips):
    assert breathing_scenario(number).dips == dips
    assert breathing_scenario(number, periods=40).dips == dips
    assert breathing_scenario(number, periods=10).dips == dips
    scaled = breathing_scenario(number, mass=3e-3, omega_f=2 * np.pi * 50.)
    assert scaled.dips == dips


def test_evolution_heats_at_the_force_noise_rate():
    mech = MechanicalParams(2.)
    prep = MeasurementParams(4., omega_f=1.5, omega_x=60.)
    verify = MeasurementParams(30., omega_f=1.5, omega_x=60.)
    tau = np.linspace(0., 5., 11)
    curve = three_stage_experiment(mech, prep, 3., verify, tau)
    rotated, _, _ = rotate_covariance(curve.prepared, 2., 3., tau)
    heating, _, _ = thermal_spread(2., 3., 2 * HBAR * 2. * 1.5 ** 2, tau)
    np.testing.assert_allclose(curve.delta_x_sq - rotated - curve.v_add_xx, heating, rtol=1e-9,
                               atol=1e-12 * heating.max())


def test_decoherence_horizon():
    mech = MechanicalParams(1.)
    verify = MeasurementParams(20., omega_f=1., omega_x=50.)
    prep = MeasurementParams(2., omega_f=1., omega_x=50.)
    horizon = decoherence_horizon(mech, prep, 8., verify)
    tau = np.linspace(horizon, 10 * horizon, 2001)
    assert not np.any(three_stage_experiment(mech, prep, 8., verify, tau).below_vacuum)
    noisy = MeasurementParams(2., omega_f=5., omega_x=50.)
    assert decoherence_horizon(mech, noisy, 8., verify) < horizon
    with pytest.raises(DomainError):
        decoherence_horizon(mech, MeasurementParams(2., omega_x=50.), 8., verify)


def test_three_stage_needs_all_stages():
    mech = MechanicalParams(1.)
    prep = MeasurementParams(2., omega_f=1., omega_x=50.)
    with pytest.raises(DomainError):
        three_stage_experiment(mech, prep, 1., None, [0., 1.])
    with pytest.raises(DomainError):
        three_stage_experiment(mech, prep, 0., prep, [0., 1.])


def test_unmonitored_carrier_heats_the_mass():
    mech = MechanicalParams(1.)
    prep = MeasurementParams(5., omega_f=1., omega_x=50.)
    verify = MeasurementParams(20., omega_f=1., omega_x=50.)
    tau = np.linspace(0., 3., 31)
    monitored = three_stage_experiment(mech, prep, 2., verify, tau)
    heated = three_stage_experiment(mech, prep, 2., verify, tau, monitor_b1=False)
    assert heated.delta_x_sq[0] == monitored.delta_x_sq[0]
    assert np.all(heated.delta_x_sq[1:] > monitored.delta_x_sq[1:])
