import numpy as np
import pytest

from qomsim.base import DomainError, NumericalError
from qomsim.conditional import (ConditionalFoM, RiccatiState, cavity_bandwidth_occupation,
                                conditional_covariance_with_noise, evolve_moments, kalman_steady_state,
                                purity_from_spectra, riccati_integrate, riccati_rhs, riccati_rhs_normalized,
                                riccati_steady_state)
from qomsim.core import HBAR, GaussianState, MeasurementParams, MechanicalParams


def relative(a, b):
    return abs(a - b) / abs(b)


def test_rhs_vanishes_on_ground_state_without_measurement():
    mech = MechanicalParams(2., omega_m=3.)
    ground = GaussianState.ground_state(mech)
    derivative = riccati_rhs(ground, mech, 0.)
    scale = np.array([ground.v_xx, HBAR, ground.v_pp]) * mech.omega_m
    np.testing.assert_allclose(derivative / scale, 0., atol=1e-12)


@pytest.mark.parametrize('ratio', [0.3, 1., 3.])
def test_rhs_vanishes_at_steady_state(ratio):
    mech = MechanicalParams(2., omega_m=3.)
    omega_q = ratio * mech.omega_m
    state = riccati_steady_state(mech, omega_q)
    alpha = MeasurementParams(omega_q).alpha(mech.mass)
    derivative = riccati_rhs(state, mech, alpha)
    scale = np.array([state.v_xx, HBAR, state.v_pp]) * mech.omega_m
    np.testing.assert_allclose(derivative / scale, 0., atol=1e-10)


def test_rhs_is_linear_in_v_xp_for_v_xx():
    mech = MechanicalParams(2., omega_m=3.)
    base = RiccatiState(0., 1., 0.5, 2.)
    shifted = RiccatiState(0., 1., 0.75, 2.)
    difference = riccati_rhs(shifted, mech, 1.)[0] - riccati_rhs(base, mech, 1.)[0]
    assert difference == pytest.approx(0.25 * 2 / mech.mass)


def test_normalized_rhs_matches_si_units():
    mech = MechanicalParams(1. / HBAR, omega_m=1.)
    ## M = 1/hbar and omega_m = 1 give position unit hbar and momentum unit 1
    si = riccati_rhs(RiccatiState(0., 0.4 * HBAR ** 2, 0.2 * HBAR, 1.3), mech, 2. / HBAR)
    normalized = riccati_rhs_normalized((0.4, 0.2, 1.3), 1., 0., 2.)
    np.testing.assert_allclose(si / np.array([HBAR ** 2, HBAR, 1.]), normalized, rtol=1e-12)


def test_closed_form_steady_state_limits():
    mech = MechanicalParams(2., omega_m=3.)
    ground = GaussianState.ground_state(mech)
    weak = riccati_steady_state(mech, 0.)
    assert relative(weak.v_xx, ground.v_xx) < 1e-12
    assert relative(weak.v_pp, ground.v_pp) < 1e-12
    assert weak.v_xp == 0.
    omega_q = 1e4 * mech.omega_m
    strong = riccati_steady_state(mech, omega_q)
    limit = riccati_steady_state(mech, omega_q, free_mass=True)
    assert relative(strong.v_xx, limit.v_xx) < 1e-3
    assert relative(strong.v_pp, limit.v_pp) < 1e-3
    assert relative(strong.v_xp, HBAR / 2) < 1e-3
    with pytest.raises(DomainError):
        riccati_steady_state(MechanicalParams(1.), 1.)


@pytest.mark.parametrize('ratio', [0.3, 1., 3., 30.])
def test_steady_state_is_pure(ratio):
    state = riccati_steady_state(MechanicalParams(2., omega_m=3.), 3. * ratio)
    assert state.determinant / (HBAR ** 2 / 4) == pytest.approx(1., rel=1e-10)


@pytest.mark.parametrize('ratio', [0.3, 1., 3.])
def test_riccati_converges_to_closed_form(ratio):
    mech = MechanicalParams(2., omega_m=3.)
    omega_q = ratio * mech.omega_m
    track = riccati_integrate(mech, omega_q, GaussianState.ground_state(mech), 600. / mech.omega_m)
    final = track[-1]
    steady = riccati_steady_state(mech, omega_q)
    assert relative(final.v_xx, steady.v_xx) < 1e-8
    assert relative(final.v_pp, steady.v_pp) < 1e-8
    if ratio > 0.5:
        assert relative(final.v_xp, steady.v_xp) < 1e-8
    assert final.v_xx * final.v_pp - final.v_xp ** 2 >= HBAR ** 2 / 4 * (1 - 1e-9)


def test_means_follow_the_free_oscillator():
    mech = MechanicalParams(1., omega_m=2.)
    initial = GaussianState.ground_state(mech).with_means(1e-3, 0.)
    times = np.linspace(0., 5., 11)
    track = evolve_moments(mech, 1., initial, 5., t_eval=times)
    np.testing.assert_allclose(track.mean_x, 1e-3 * np.cos(2. * times), atol=1e-11)


def test_conditional_state_without_classical_noise_is_pure():
    cond = conditional_covariance_with_noise(MechanicalParams(1.), MeasurementParams(10.))
    assert cond.fom.purity == pytest.approx(1.)
    assert cond.fom.n_eff == 0.
    assert cond.fom.von_neumann == 0.
    assert cond.state.v_xp / (HBAR / 2) == pytest.approx(1.)


@pytest.mark.parametrize('ratio', [10., 25., 50.])
def test_occupation_at_optimal_strength(ratio):
    omega_f = 2.
    omega_x = ratio * omega_f
    meas = MeasurementParams(np.sqrt(omega_x * omega_f), omega_f=omega_f, omega_x=omega_x)
    cond = conditional_covariance_with_noise(MechanicalParams(1.), meas)
    assert cond.fom.n_eff == pytest.approx(1. / ratio, rel=0.01)
    assert cond.n_eff_min == pytest.approx(1. / ratio)
    assert cond.optimal_omega_q == pytest.approx(meas.omega_q)
    assert cond.sub_sql_window


def test_occupation_minimized_at_optimal_strength():
    mech = MechanicalParams(1.)
    strengths = np.logspace(-1, 2, 301) * np.sqrt(50.)
    occupations = [conditional_covariance_with_noise(mech, MeasurementParams(q, omega_f=1., omega_x=50.)).fom.n_eff
                   for q in strengths]
    assert strengths[int(np.argmin(occupations))] == pytest.approx(np.sqrt(50.), rel=0.025)


def test_classical_noise_at_the_sql():
    meas = MeasurementParams(np.sqrt(2.), omega_f=1., omega_x=2.)
    cond = conditional_covariance_with_noise(MechanicalParams(1.), meas)
    assert cond.fom.n_eff == pytest.approx(0.5)
    assert not cond.sub_sql_window


def test_regime_flag():
    cond = conditional_covariance_with_noise(MechanicalParams(1., omega_m=1.), MeasurementParams(2.))
    assert not cond.regime_ok
    with pytest.raises(DomainError):
        conditional_covariance_with_noise(MechanicalParams(1.), MeasurementParams(0.))


def test_figures_of_merit():
    fom = ConditionalFoM.from_purity(2.)
    assert fom.n_eff == 0.5
    assert fom.linear_entropy == 0.5
    assert fom.von_neumann == pytest.approx(1.5 * np.log(1.5) - 0.5 * np.log(0.5))


def test_purity_from_spectra():
    assert purity_from_spectra(HBAR / 3., 3. * HBAR) == pytest.approx(1.)
    assert purity_from_spectra(2 * HBAR / 3., 6. * HBAR) == pytest.approx(2.)
    assert purity_from_spectra(2 * HBAR / 3. * 7., 6. * HBAR / 7.) == pytest.approx(2.)
    with pytest.raises(NumericalError):
        purity_from_spectra(HBAR, HBAR, 2 * HBAR)


def test_purity_from_spectra_matches_conditional_state():
    mech = MechanicalParams(1.)
    meas = MeasurementParams(5., omega_f=1., omega_x=20.)
    s_zz = HBAR * meas.sensing_factor / (mech.mass * meas.omega_q ** 2)
    s_ff = HBAR * mech.mass * meas.omega_q ** 2 * meas.force_factor
    cond = conditional_covariance_with_noise(mech, meas)
    assert purity_from_spectra(s_zz, s_ff) == pytest.approx(cond.fom.purity, rel=1e-12)


def test_cavity_bandwidth_occupation():
    assert cavity_bandwidth_occupation(1., 1.) == pytest.approx(0.1768, rel=1e-3)
    assert cavity_bandwidth_occupation(0.1, 1.) == pytest.approx(0.01768, rel=1e-3)
    assert cavity_bandwidth_occupation(0., 1.) == 0.
    with pytest.raises(DomainError):
        cavity_bandwidth_occupation(1., 0.)


@pytest.mark.parametrize('xi_f', [0., 0.3, 1.])
@pytest.mark.parametrize('xi_x', [0., 0.3, 1.])
def test_kalman_matches_free_mass_closed_form(xi_f, xi_x):
    mech = MechanicalParams(3.)
    omega_q = 50.
    meas = MeasurementParams(omega_q, omega_f=xi_f * omega_q, omega_x=omega_q / xi_x if xi_x else np.inf)
    s_zz = HBAR * meas.sensing_factor / (mech.mass * omega_q ** 2)
    s_ff = HBAR * mech.mass * omega_q ** 2 * meas.force_factor
    kalman = kalman_steady_state(mech, s_zz, s_ff)
    closed = conditional_covariance_with_noise(mech, meas).state
    for name in ('v_xx', 'v_xp', 'v_pp'):
        assert relative(getattr(kalman, name), getattr(closed, name)) < 1e-8


@pytest.mark.parametrize('ratio', [0.5, 1., 2.])
def test_kalman_matches_riccati_steady_state(ratio):
    mech = MechanicalParams(2., omega_m=3.)
    omega_q = ratio * mech.omega_m
    kalman = kalman_steady_state(mech, HBAR / (mech.mass * omega_q ** 2), HBAR * mech.mass * omega_q ** 2)
    steady = riccati_steady_state(mech, omega_q)
    for name in ('v_xx', 'v_xp', 'v_pp'):
        assert relative(getattr(kalman, name), getattr(steady, name)) < 1e-8


def test_kalman_input_checks():
    mech = MechanicalParams(1.)
    with pytest.raises(DomainError):
        kalman_steady_state(mech, 0., 1.)
    with pytest.raises(DomainError):
        kalman_steady_state(mech, 1., -1.)
    with pytest.raises(DomainError):
        kalman_steady_state(mech, 1., 0.)
