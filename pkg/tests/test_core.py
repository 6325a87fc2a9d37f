import math

import numpy as np
import pytest

from qomsim.base import DomainError
from qomsim.core import (HBAR, K_B, GaussianState, MeasurementParams, MechanicalParams, OpticalParams,
                         SpectrumCurve, WienerSource, circulating_power_for, db_to_squeeze, fdt_force_spectrum,
                         quadrature_covariance, squeezed_quadrature_spectra, thermal_occupation,
                         vacuum_quadrature_spectra, wavelength_to_omega)


def test_vacuum_spectra():
    assert vacuum_quadrature_spectra() == (1.0, 1.0, 0.0)
    assert squeezed_quadrature_spectra(0., 0.7) == pytest.approx((1., 1., 0.), abs=1e-15)
    assert squeezed_quadrature_spectra(1.3, 0.2, loss=1.) == pytest.approx((1., 1., 0.), abs=1e-15)


def test_ten_db_squeezing():
    q = db_to_squeeze(10.)
    assert q == pytest.approx(np.log(np.sqrt(10.)))
    assert squeezed_quadrature_spectra(q, 0.) == pytest.approx((10., 0.1, 0.), abs=1e-12)


def test_rotated_squeezing_sign():
    q = 0.8
    s_a1, s_a2, s_a12 = squeezed_quadrature_spectra(q, np.pi / 4)
    assert s_a1 == pytest.approx(np.cosh(2 * q))
    assert s_a2 == pytest.approx(np.cosh(2 * q))
    assert s_a12 == pytest.approx(np.sinh(2 * q))


@pytest.mark.parametrize('q, phi', [(0., 0.), (1., 0.), (0.5, 1.1), (2., -0.4)])
def test_squeeze_is_symplectic(q, phi):
    assert np.linalg.det(quadrature_covariance(q, phi)) == pytest.approx(1., rel=1e-12)


@pytest.mark.parametrize('loss', [-0.1, 1.5])
def test_loss_outside_unit_interval(loss):
    with pytest.raises(DomainError):
        squeezed_quadrature_spectra(1., 0., loss)


def test_fdt_force_spectrum():
    mech = MechanicalParams(2., omega_m=10., gamma_m=0.1)
    assert fdt_force_spectrum(mech, 0.1, 0.) == pytest.approx(4 * 2. * 0.1 * HBAR * 10., abs=0)
    temperature = 1e4 * HBAR * 10. / K_B
    classical = fdt_force_spectrum(mech, 0.1, temperature, classical_limit=True)
    assert fdt_force_spectrum(mech, 0.1, temperature) == pytest.approx(classical, rel=1e-4, abs=0)
    n = thermal_occupation(10., temperature)
    assert fdt_force_spectrum(mech, 0.1, temperature) == \
        pytest.approx(8 * 2. * 0.1 * HBAR * 10. * (n + 0.5), rel=1e-10, abs=0)


def test_fdt_free_mass_needs_classical_limit():
    free = MechanicalParams(1.)
    with pytest.raises(DomainError):
        fdt_force_spectrum(free, 0.1, 300.)
    assert fdt_force_spectrum(free, 0.1, 300., classical_limit=True) == pytest.approx(8 * 0.1 * K_B * 300., abs=0)


def test_circulating_power_of_km_scale_detector():
    theta = 2 * np.pi * 100.
    omega_0 = wavelength_to_omega(1064e-9)
    power = circulating_power_for(theta, omega_0, 4e3, 10., n_arms=2)
    assert power == pytest.approx(830e3, rel=0.1)
    opt = OpticalParams(omega_0, gamma=theta, length=4e3, power=power, n_arms=2)
    assert opt.theta(10.) == pytest.approx(theta, rel=1e-12)
    assert opt.theta_cubed(10.) == pytest.approx(4 * omega_0 * power / (2 * 10. * 4e3 * 299792458.), rel=1e-12)


def test_reduced_mass():
    assert MechanicalParams(10., omega_m=1.).reduced(4).mass == 2.5
    with pytest.raises(DomainError):
        MechanicalParams(10.).reduced(0)


@pytest.mark.parametrize('kwargs', [{'mass': 0.}, {'mass': 1., 'omega_m': -1.}, {'mass': 1., 'gamma_m': -1.},
                                    {'mass': 1., 'temperature': -1.}])
def test_mechanical_validation(kwargs):
    with pytest.raises(DomainError):
        MechanicalParams(**kwargs)


def test_measurement_ratios():
    meas = MeasurementParams(2., omega_f=1., omega_x=8.)
    assert meas.xi_f == 0.5
    assert meas.xi_x == 0.25
    assert meas.force_factor == pytest.approx(1.5)
    assert meas.sensing_factor == pytest.approx(1.125)
    assert meas.alpha(3.) == pytest.approx(2. * np.sqrt(3. / HBAR))
    assert MeasurementParams(0., omega_f=1.).xi_f == math.inf
    with pytest.raises(DomainError):
        MeasurementParams(1., loss=2.)


def test_spectrum_curve_checks():
    curve = SpectrumCurve([1., 2., 3.], [1., 1., 2.], 'm^2/Hz')
    assert (curve + curve).values.tolist() == [2., 2., 4.]
    np.testing.assert_allclose(curve.amplitude(), np.sqrt([1., 1., 2.]))
    with pytest.raises(DomainError):
        SpectrumCurve([1., 1., 3.], [1., 1., 2.], 'm^2/Hz')
    with pytest.raises(DomainError):
        SpectrumCurve([1., 2.], [1., -1.], 'm^2/Hz')
    with pytest.raises(DomainError):
        curve + SpectrumCurve([1., 2., 3.], [1., 1., 2.], 'N^2/Hz')


def test_gaussian_state():
    mech = MechanicalParams(3., omega_m=5.)
    ground = GaussianState.ground_state(mech)
    assert ground.purity == pytest.approx(1.)
    assert ground.is_physical()
    assert not ground.scaled(0.5).is_physical()
    assert ground.quadrature_variance(0.) == ground.v_xx
    with pytest.raises(DomainError):
        GaussianState.ground_state(MechanicalParams(1.))


def test_wiener_source_reproducible():
    source = WienerSource(7, 1e-3)
    np.testing.assert_array_equal(source.increments(3, 100, 2), source.increments(3, 100, 2))
    assert not np.array_equal(source.increments(3, 100, 2), source.increments(4, 100, 2))


def test_wiener_source_statistics():
    dt = 1e-3
    draws = WienerSource(11, dt).increments(0, 200000, 2)
    n = draws.shape[0]
    assert abs(draws[:, 0].mean()) < 5 * np.sqrt(dt / n)
    assert draws[:, 0].var() == pytest.approx(dt, abs=5 * dt * np.sqrt(2. / n))
    lagged = np.mean(draws[1:, 0] * draws[:-1, 0])
    assert abs(lagged) < 5 * dt / np.sqrt(n)


def test_wiener_source_refinement_shares_path():
    coarse = WienerSource(5, 4e-3, refine=4).increments(2, 50)
    fine = WienerSource(5, 1e-3).increments(2, 200)
    np.testing.assert_allclose(coarse[:, 0], fine[:, 0].reshape(50, 4).sum(axis=1), rtol=1e-12)


def test_white_noise_average():
    ## an S = 2 white process averaged over dt has variance 1/dt
    dt = 1e-2
    increments = WienerSource(3, dt).increments(0, 100000)[:, 0]
    averages = increments / dt
    assert averages.var() == pytest.approx(1. / dt, rel=3 * np.sqrt(2. / averages.size))
