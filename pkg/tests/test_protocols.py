import numpy as np
import pytest

from qomsim.base import DomainError
from qomsim.core import HBAR, GaussianState, MeasurementParams, MechanicalParams, db_to_squeeze
from qomsim.protocols import (TeleportParams, entanglement_window, log_negativity, mirror_covariance,
                              mirror_entanglement, mirror_entanglement_decay, normal_mode_stiffness,
                              optimize_teleport, strong_coupling_ratio, teleport_added_noise, teleport_asymptote,
                              teleport_sloshing)


def epr_pair(r):
    squeezed = GaussianState(0., 0., np.exp(-2 * r) * HBAR / 2, 0., np.exp(2 * r) * HBAR / 2)
    anti = GaussianState(0., 0., np.exp(2 * r) * HBAR / 2, 0., np.exp(-2 * r) * HBAR / 2)
    return squeezed, anti


def test_sloshing_modes():
    params = TeleportParams(2., 2., 1.)
    modes = teleport_sloshing(params)
    assert modes.omega_plus == pytest.approx(2. * np.sqrt(1.5))
    assert modes.omega_minus == pytest.approx(2. * np.sqrt(0.5))
    assert modes.tau_ex == pytest.approx(np.pi / (modes.omega_plus - modes.omega_minus))
    np.testing.assert_allclose(np.sqrt(normal_mode_stiffness(params)), [modes.omega_minus, modes.omega_plus])


def test_sloshing_needs_feedback():
    params = TeleportParams(2., 2., 0.)
    assert np.isinf(teleport_sloshing(params).tau_ex)
    with pytest.raises(DomainError):
        teleport_added_noise(params)


@pytest.mark.parametrize('kwargs', [{'eps_fb': 4.}, {'eps_fb': -1.}, {'omega_q': 0.}])
def test_teleport_parameter_checks(kwargs):
    options = {'omega_opt': 2., 'omega_q': 1., 'eps_fb': 1.}
    options.update(kwargs)
    with pytest.raises(DomainError):
        TeleportParams(**options)


def test_teleport_added_noise():
    params = TeleportParams(3., 2., 1., omega_f=0.5, omega_x=20.)
    modes = teleport_sloshing(params)
    noise = teleport_added_noise(params)
    zeta_f = np.sqrt(1. + 2 * 0.25 ** 2)
    zeta_x = np.sqrt(1. + 2 * 0.1 ** 2)
    prefactor = np.pi / 8 * (zeta_f * 4. + zeta_x) / modes.omega_slosh
    assert noise.v_pp == pytest.approx(2 * prefactor)
    assert noise.v_xx == pytest.approx(prefactor * (modes.omega_plus ** -2 + modes.omega_minus ** -2))
    assert noise.det_ratio == pytest.approx(4 * noise.v_xx * noise.v_pp)
    si = noise.to_si(2.)
    assert si.det / HBAR ** 2 == pytest.approx(noise.det)
    assert si.det_ratio == noise.det_ratio


def test_teleport_optimum_approaches_asymptote():
    squeeze = db_to_squeeze(10.)
    asymptote = teleport_asymptote(1., 50., squeeze)
    assert asymptote == pytest.approx(np.pi ** 2 * 0.14)
    params, noise = optimize_teleport(30. * np.sqrt(50.), 1., 50., squeeze)
    assert noise.det_ratio == pytest.approx(asymptote, rel=0.1)
    assert params.omega_opt ** 2 > params.eps_fb * params.omega_q
    with pytest.raises(DomainError):
        optimize_teleport(10., 0., 50.)


def test_log_negativity_of_epr_pair():
    common, differential = epr_pair(0.5)
    assert log_negativity(mirror_covariance(common, differential)) == pytest.approx(1.)
    assert log_negativity(mirror_covariance(common, common)) == pytest.approx(0., abs=1e-9)
    vacuum = np.eye(4) * HBAR / 2
    assert log_negativity(vacuum) == pytest.approx(0., abs=1e-9)


def test_mirror_covariance_blocks():
    common, differential = epr_pair(0.3)
    covariance = mirror_covariance(common, differential)
    assert covariance.shape == (4, 4)
    np.testing.assert_allclose(covariance, covariance.T)
    np.testing.assert_allclose(covariance[:2, :2], covariance[2:, 2:])


def test_equal_strength_mirrors_are_not_entangled():
    mech = MechanicalParams(1.)
    meas = MeasurementParams(np.sqrt(50.), omega_f=1., omega_x=50.)
    assert mirror_entanglement(mech, meas, split=1.)[0] == 0.
    entanglement, common, differential = mirror_entanglement(mech, meas)
    assert entanglement > 0
    assert common.state.v_xx < differential.state.v_xx
    with pytest.raises(DomainError):
        mirror_entanglement(mech, meas, split=0.)


def test_entanglement_decays_under_force_noise():
    mech = MechanicalParams(1.)
    meas = MeasurementParams(np.sqrt(50.), omega_f=1., omega_x=50.)
    entanglement, common, differential = mirror_entanglement(mech, meas)
    tau = np.array([0., 0.1, 100.]) / meas.omega_q
    decay = mirror_entanglement_decay(common.state, differential.state, mech, 1., tau)
    assert decay[0] == pytest.approx(entanglement, rel=1e-9)
    assert decay[1] < decay[0]
    assert decay[2] == 0.


def test_entanglement_window():
    window = entanglement_window(50.)
    assert window.omega_q == pytest.approx(np.sqrt(50.))
    assert window.survival_scale == pytest.approx(1. / np.sqrt(50.))
    assert window.log_negativity == pytest.approx(0.80, rel=0.05)
    assert window.tomography_det_ratio < 1
    assert window.feasible
    assert not entanglement_window(1.5).feasible
    with pytest.raises(DomainError):
        entanglement_window(0.)


def test_strong_coupling_ratio():
    mech = MechanicalParams(1e-15, omega_m=1e6)
    zero_point = np.sqrt(HBAR / (mech.mass * mech.omega_m))
    weak = strong_coupling_ratio(mech, 1e-6, 1e5)
    assert weak.verdict == 'weak'
    assert weak.ratio == pytest.approx(1e-11 / zero_point)
    assert weak.momentum_ratio == pytest.approx(weak.ratio / (2 * np.pi))
    assert strong_coupling_ratio(mech, 1e-6, 1e7).verdict == 'strong'
    assert strong_coupling_ratio(mech, 1e-6, 1e-6 / zero_point).verdict == 'marginal'
    with pytest.raises(DomainError):
        strong_coupling_ratio(mech, 1e-6, 0.)
    with pytest.raises(DomainError):
        strong_coupling_ratio(MechanicalParams(1.), 1e-6, 1e5)
