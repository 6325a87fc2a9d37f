"""
One WorkFlow per subcommand. A workflow reads its RunConfig, calls the physics modules and writes the curves and
a JSON report (inputs echoed next to the derived results) to the output directory.
"""
import logging
import math
import os
from contextlib import contextmanager
from dataclasses import asdict, replace

import numpy as np
import pandas as pd

from qomsim.base import ConfigError, DomainError, WorkFlow
from qomsim.conditional import (conditional_covariance_with_noise, kalman_steady_state, purity_from_spectra,
                                riccati_integrate, riccati_steady_state)
from qomsim.control import (controlled_occupation, critical_temperature, feedback_cooling_occupation,
                            feedback_recovery_gain, optimal_controlled_state, qf_criterion, radiation_damping)
from qomsim.core import (HBAR, GaussianState, MeasurementParams, MechanicalParams, OpticalParams,
                         circulating_power_for, db_to_squeeze, wavelength_to_omega)
from qomsim.mqm import (SILICON_ATOM_MASS, SILICON_CONCENTRATION, SILICON_DENSITY, MaterialParams,
                        gravity_decoherence_cycles, sn_frequency_split)
from qomsim.protocols import (TeleportParams, entanglement_window, normal_mode_stiffness, optimize_teleport,
                              strong_coupling_ratio, teleport_added_noise, teleport_asymptote, teleport_sloshing)
from qomsim.spectra import (classical_noise_budget, readout_spectra, sql_displacement, sql_force, sql_strain,
                            tuned_readout_noise)
from qomsim.trajectory import breathing_scenario, ensemble_statistics, simulate_conditional
from qomsim.utils import frequency_grid, write_csv, write_json
from qomsim.verification import optimize_b2_tomography, steering_measures, tomography_error, universal_entanglement
from qomsim.wiener import wiener_covariance

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

## unit tag accepted after the number of each key, '1' for dimensionless
KEY_UNITS = {
    'mass': 'kg', 'omega_m': 'rad/s', 'gamma_m': 'rad/s', 'temperature': 'K',
    'omega_q': 'rad/s', 'zeta': 'rad', 'omega_f': 'rad/s', 'omega_x': 'rad/s', 'squeeze_db': 'dB',
    'squeeze_angle': 'rad', 'loss': '1',
    'wavelength': 'm', 'detuning': 'rad/s', 'gamma': 'rad/s', 'length': 'm', 'power': 'W', 'theta': 'rad/s',
    'n_arms': '1', 'normalized': '1',
    'duration': 's', 'dt': 's', 'n_traj': '1', 'stride': '1', 'refine': '1', 'hidden': '1',
    'feedback_kx': 'N/m', 'feedback_kp': '1/s',
    'tc_ratio_min': '1', 'tc_ratio_max': '1', 'tc_points': '1', 'dilution': '1',
    'b2': '1', 'breathing_scenario': '1',
    'omega_opt': 'rad/s', 'eps_fb': 'rad/s', 'optimize': '1',
    'density': 'kg/m^3', 'concentration': '1', 'atom_mass': 'kg', 'delta_x_zp': 'm', 'omega_c': 'rad/s',
    'finesse': '1',
}

REQUIRED_KEYS = {
    'spectrum': ('mass',),
    'conditional': ('mass', 'omega_q'),
    'trajectory': ('mass', 'omega_q', 'duration', 'dt'),
    'control': ('mass', 'omega_m', 'gamma_m', 'temperature'),
    'tomography': ('mass', 'omega_q'),
    'teleport': ('omega_opt', 'omega_q', 'eps_fb'),
    'mqm': (),
}

STRING_KEYS = {'mode': ('tuned', 'classical'), 'referred': ('force', 'displacement', 'strain'),
               'force_noise': ('resolved', 'filtered')}


def _quantity(config, key, default=None):
    return config.get_quantity(key, KEY_UNITS[key], default)


def _choice(config, key, default):
    value = config.get_str(key, default)
    if value not in STRING_KEYS[key]:
        raise ConfigError("key '%s' must be one of %s, got '%s'" % (key, ', '.join(STRING_KEYS[key]), value))
    return value


def _flag(config, key):
    return bool(config.get_int(key, 0))


@contextmanager
def _validating():
    "Parameters rejected by their own checks are configuration errors"
    try:
        yield
    except DomainError as e:
        raise ConfigError("invalid configuration: %s" % e)


def mechanical_from_config(config):
    with _validating():
        return MechanicalParams(_quantity(config, 'mass'), _quantity(config, 'omega_m', 0.),
                                _quantity(config, 'gamma_m', 0.), _quantity(config, 'temperature', 0.))


def measurement_from_config(config, omega_q=None):
    with _validating():
        return MeasurementParams(_quantity(config, 'omega_q') if omega_q is None else omega_q,
                                 zeta=_quantity(config, 'zeta', np.pi / 2),
                                 omega_f=_quantity(config, 'omega_f', 0.),
                                 omega_x=_quantity(config, 'omega_x', math.inf),
                                 squeeze=db_to_squeeze(_quantity(config, 'squeeze_db', 0.)),
                                 squeeze_angle=_quantity(config, 'squeeze_angle', 0.),
                                 loss=_quantity(config, 'loss', 0.))


def optical_from_config(config, mass):
    """
    Cavity of the config; a `theta` key sets the circulating power through Theta^3 = 4 omega_0 I_c/(n M L c).
    """
    with _validating():
        omega_0 = wavelength_to_omega(_quantity(config, 'wavelength', 1064e-9))
        length = _quantity(config, 'length', 1.)
        n_arms = config.get_int('n_arms', 1)
        if config.has('theta'):
            power = circulating_power_for(_quantity(config, 'theta'), omega_0, length, mass, n_arms)
        else:
            power = _quantity(config, 'power', 0.)
        return OpticalParams(omega_0, _quantity(config, 'detuning', 0.), _quantity(config, 'gamma'), length,
                             power, n_arms)


class _Outputs:
    """
    Collects the curves of a run. CSV output writes one file per curve; JSON output embeds them in the report.
    """

    def __init__(self, config):
        self._config = config
        self._curves = {}

    def emit(self, name, frame):
        if self._config.get_output_format() == 'csv':
            write_csv(frame, os.path.join(self._config.get_output_dir(), name + '.csv'))
        else:
            self._curves[name] = {column: frame[column].tolist() for column in frame.columns}

    def finish(self, results):
        report = {'config': self._config.to_dict(), 'results': results}
        if self._curves:
            report['curves'] = self._curves
        write_json(report, os.path.join(self._config.get_output_dir(),
                                        self._config.get_subcommand() + '_report.json'))
        return report


class _ConfiguredWorkFlow(WorkFlow):

    def __init__(self, config, verbose=False):
        self._config = config
        self._verbose = verbose
        self._outputs = _Outputs(config)

    def _check(self):
        self._config.require(*REQUIRED_KEYS[self._config.get_subcommand()])


class SpectrumWorkFlow(_ConfiguredWorkFlow):
    """
    Noise budget of the tuned interferometer ('tuned') or of a position measurement with classical noise
    ('classical'). normalized = 1 divides the axes by gamma and by the SQL at gamma.
    """

    def run(self):
        self._check()
        config = self._config
        mech = mechanical_from_config(config)
        omega = frequency_grid(*config.get_grid())
        mode = _choice(config, 'mode', 'tuned')
        results = {'mode': mode}
        if mode == 'tuned':
            opt = optical_from_config(config, mech.mass)
            meas = measurement_from_config(config, omega_q=0.)
            referred = _choice(config, 'referred', 'displacement')
            budget = tuned_readout_noise(opt, mech, meas, omega, referred=referred)
            results.update({'theta_rad_s': opt.theta(mech.mass), 'circulating_power_w': opt.power,
                            'referred': referred})
            omega_scale, spectrum_scale = 1., 1.
            if _flag(config, 'normalized'):
                omega_scale = opt.gamma
                spectrum_scale = self._sql_at(referred, mech, opt, opt.gamma)
        else:
            meas = measurement_from_config(config)
            budget, beat = classical_noise_budget(mech, meas, omega)
            results.update({'classical_ratio': beat.ratio, 'classical_omega_min': beat.omega_min,
                            'beats_sql': beat.beats_sql})
            omega_scale, spectrum_scale = 1., 1.
        ratio = budget.total.values / budget.sql.values
        best = int(np.nanargmin(ratio))
        results.update({'min_total_over_sql': float(ratio[best]), 'omega_at_min': float(budget.omega[best])})
        print('Noise budget on %d frequencies, closest approach to the SQL at %.4g rad/s'
              % (omega.size, budget.omega[best]))
        self._outputs.emit('noise_budget', budget.to_frame(omega_scale, spectrum_scale))
        return self._outputs.finish(results)

    @staticmethod
    def _sql_at(referred, mech, opt, omega):
        if referred == 'force':
            return float(sql_force(mech, [omega])[0])
        if referred == 'strain':
            return float(sql_strain(mech, [omega], opt.length)[0])
        return float(sql_displacement(mech, [omega])[0])


class ConditionalWorkFlow(_ConfiguredWorkFlow):
    """
    Conditional state and its figures of merit; with a `duration` key the Riccati transient from the vacuum
    state at Omega_q is written too.
    """

    def run(self):
        self._check()
        config = self._config
        mech = mechanical_from_config(config)
        meas = measurement_from_config(config)
        state = conditional_covariance_with_noise(mech, meas)
        s_zz, s_ff, s_zf = readout_spectra(mech, meas)
        kalman = kalman_steady_state(mech, s_zz, s_ff, s_zf)
        results = {'conditional': asdict(state.state), 'fom': asdict(state.fom), 'regime_ok': state.regime_ok,
                   'sub_sql_window': state.sub_sql_window, 'optimal_omega_q': state.optimal_omega_q,
                   'n_eff_min': state.n_eff_min, 'kalman': asdict(kalman),
                   'wiener': asdict(wiener_covariance(mech, s_zz, s_ff, s_zf)),
                   'purity_from_spectra': purity_from_spectra(s_zz, s_ff, s_zf)}
        if mech.omega_m > 0 and mech.gamma_m == 0:
            results['riccati_steady_state'] = asdict(riccati_steady_state(mech, meas.omega_q))
        if config.has('duration'):
            duration = _quantity(config, 'duration')
            m, omega_q = mech.mass, meas.omega_q
            initial = GaussianState(0., 0., HBAR / (2 * m * omega_q), 0., HBAR * m * omega_q / 2)
            times = np.linspace(0., duration, 201)
            track = riccati_integrate(mech, meas.omega_q, initial, duration, meas.sensing_factor,
                                      meas.force_noise(mech.mass) / 2, times)
            self._outputs.emit('riccati', pd.DataFrame([asdict(s) for s in track]))
        print('Conditional state: purity U = %.6g, N_eff = %.6g' % (state.fom.purity, state.fom.n_eff))
        return self._outputs.finish(results)


class TrajectoryWorkFlow(_ConfiguredWorkFlow):
    """
    Ensemble of conditional trajectories: one CSV per trajectory plus the ensemble statistics, or a single JSON
    document holding all of them.
    """

    def run(self):
        self._check()
        config = self._config
        mech = mechanical_from_config(config)
        meas = measurement_from_config(config)
        records = simulate_conditional(mech, meas, _quantity(config, 'duration'), _quantity(config, 'dt'),
                                       seed=config.get_seed(), n_traj=config.get_int('n_traj', 1),
                                       stride=config.get_int('stride', 1),
                                       force_noise=_choice(config, 'force_noise', 'resolved'),
                                       feedback=(_quantity(config, 'feedback_kx', 0.),
                                                 _quantity(config, 'feedback_kp', 0.)),
                                       hidden=_flag(config, 'hidden'), refine=config.get_int('refine', 1),
                                       verbose=self._verbose)
        for record in records:
            self._outputs.emit('trajectory_%04d' % record.index, record.to_frame())
        self._outputs.emit('ensemble', ensemble_statistics(records))
        final = records[0].state(-1)
        results = {'n_traj': len(records), 'n_samples': int(records[0].t.size),
                   'final_covariance': {'v_xx': final.v_xx, 'v_xp': final.v_xp, 'v_pp': final.v_pp},
                   'final_means': [[float(r.mean_x[-1]), float(r.mean_p[-1])] for r in records]}
        print('Simulated %d trajectories of %d stored samples' % (len(records), records[0].t.size))
        return self._outputs.finish(results)


class ControlWorkFlow(_ConfiguredWorkFlow):
    """
    Feedback cooling of a thermal oscillator: optimum at the configured temperature, a sweep of T_m/T_c with the
    optimal and strong-measurement occupations, the Q f benchmark and, with a `detuning` key, radiation damping
    with and without feedback.
    """

    def run(self):
        self._check()
        config = self._config
        mech = mechanical_from_config(config)
        t_c = critical_temperature(mech)
        cooling = feedback_cooling_occupation(mech)
        results = {'critical_temperature_k': t_c, 'feedback_cooling': asdict(cooling),
                   'qf': asdict(qf_criterion(mech, _quantity(config, 'dilution', 1.)))}
        ratios = np.logspace(np.log10(_quantity(config, 'tc_ratio_min', 1e-4)),
                             np.log10(_quantity(config, 'tc_ratio_max', 1e2)), config.get_int('tc_points', 13))
        rows = []
        strong_omega_q = 1e3 * mech.omega_m
        for ratio in ratios:
            swept = replace(mech, temperature=ratio * t_c)
            optimum = feedback_cooling_occupation(swept)
            rows.append({'tm_over_tc': ratio, 'n_eff_opt': optimum.n_eff, 'omega_q_opt': optimum.omega_q,
                         'scaling': optimum.scaling, 'n_eff_strong': controlled_occupation(swept, strong_omega_q)})
        self._outputs.emit('critical_sweep', pd.DataFrame(rows))
        free = MechanicalParams(mech.mass)
        strong = optimal_controlled_state(riccati_steady_state(free, strong_omega_q, free_mass=True))
        results['strong_measurement_n_eff'] = strong.n_eff
        if config.has('detuning'):
            opt = optical_from_config(config, mech.mass)
            results['radiation_damping'] = asdict(radiation_damping(opt, mech))
            results['feedback_recovery'] = asdict(feedback_recovery_gain(opt, mech))
        print('Critical temperature %.4g K, optimal N_eff %.4g' % (t_c, cooling.n_eff))
        return self._outputs.finish(results)


class TomographyWorkFlow(_ConfiguredWorkFlow):
    """
    Verification budget at Omega_q: tomography error, steering duals, test-mass/light entanglement and, on request,
    phase-quadrature tomography and a breathing experiment.
    """

    def run(self):
        self._check()
        config = self._config
        mech = mechanical_from_config(config)
        meas = measurement_from_config(config)
        tomo = tomography_error(mech, meas)
        steering = steering_measures(tomo)
        results = {'tomography': asdict(tomo), 'steering': asdict(steering)}
        if meas.omega_f > 0:
            results['log_negativity_light'] = universal_entanglement(meas.omega_q, meas.omega_f)
        if _flag(config, 'b2'):
            b2, gamma, omega_b = optimize_b2_tomography(mech, meas)
            results['b2_tomography'] = dict(asdict(b2), gamma=gamma, omega_b=omega_b)
        if config.has('breathing_scenario'):
            curve = breathing_scenario(config.get_int('breathing_scenario'), mass=mech.mass,
                                       omega_f=meas.omega_f or 1.0,
                                       squeeze_db=_quantity(config, 'squeeze_db', 10.))
            results['breathing'] = {'dips': curve.dips, 'vacuum': curve.vacuum,
                                    'below_vacuum_at_start': bool(curve.below_vacuum[0])}
            self._outputs.emit('breathing', curve.to_frame())
        print('Tomography det ratio %.4g, sub-Heisenberg: %s' % (tomo.det_ratio, tomo.sub_heisenberg))
        return self._outputs.finish(results)


class TeleportWorkFlow(_ConfiguredWorkFlow):
    """
    Teleportation between two oscillators (hbar = M = 1) and the two-mirror entanglement window.
    """

    def run(self):
        self._check()
        config = self._config
        omega_f = _quantity(config, 'omega_f', 0.)
        omega_x = _quantity(config, 'omega_x', math.inf)
        squeeze = db_to_squeeze(_quantity(config, 'squeeze_db', 0.))
        with _validating():
            params = TeleportParams(_quantity(config, 'omega_opt'), _quantity(config, 'omega_q'),
                                    _quantity(config, 'eps_fb'), squeeze, omega_f, omega_x)
        results = {'sloshing': asdict(teleport_sloshing(params)),
                   'normal_mode_stiffness': normal_mode_stiffness(params)}
        if params.eps_fb > 0:
            results['added_noise'] = asdict(teleport_added_noise(params))
        if omega_f > 0 and math.isfinite(omega_x):
            results['asymptote_det_ratio'] = teleport_asymptote(omega_f, omega_x, squeeze)
            results['entanglement_window'] = asdict(entanglement_window(omega_x / omega_f,
                                                                        _quantity(config, 'squeeze_db', 0.),
                                                                        omega_f))
            if _flag(config, 'optimize'):
                best, noise = optimize_teleport(params.omega_opt, omega_f, omega_x, squeeze)
                results['optimum'] = {'omega_q': best.omega_q, 'eps_fb': best.eps_fb, 'det_ratio': noise.det_ratio}
        print('Sloshing frequency %.4g rad/s' % results['sloshing']['omega_slosh'])
        return self._outputs.finish(results)


class MqmWorkFlow(_ConfiguredWorkFlow):
    """
    Gravity-decoherence thresholds and the Schrodinger-Newton split, silicon by default; with `finesse`, `mass`
    and `omega_m` the strong-coupling ratio is added.
    """

    def run(self):
        self._check()
        config = self._config
        density = _quantity(config, 'density', SILICON_DENSITY)
        with _validating():
            if config.has('delta_x_zp'):
                material = MaterialParams(density, _quantity(config, 'atom_mass', SILICON_ATOM_MASS),
                                          _quantity(config, 'delta_x_zp'))
            else:
                material = MaterialParams.from_concentration(density,
                                                             _quantity(config, 'atom_mass', SILICON_ATOM_MASS),
                                                             _quantity(config, 'concentration',
                                                                       SILICON_CONCENTRATION))
        omega_q = _quantity(config, 'omega_q', 1.)
        uniform = gravity_decoherence_cycles(omega_q, density)
        lattice = gravity_decoherence_cycles(omega_q, density, material.concentration)
        split = sn_frequency_split(_quantity(config, 'omega_c', 2 * np.pi * 10.), material)
        results = {'concentration': material.concentration, 'delta_x_zp_m': material.delta_x_zp,
                   'uniform': asdict(uniform), 'lattice': asdict(lattice), 'sn_split': asdict(split)}
        if config.has('finesse'):
            mech = mechanical_from_config(config)
            results['strong_coupling'] = asdict(strong_coupling_ratio(mech, _quantity(config, 'wavelength', 1064e-9),
                                                                      _quantity(config, 'finesse')))
        print('omega_SN = %.4g 1/s, lattice threshold 1/Omega_q = %.4g s' % (split.omega_sn, lattice.threshold_time))
        return self._outputs.finish(results)


WORKFLOWS = {'spectrum': SpectrumWorkFlow, 'conditional': ConditionalWorkFlow, 'trajectory': TrajectoryWorkFlow,
             'control': ControlWorkFlow, 'tomography': TomographyWorkFlow, 'teleport': TeleportWorkFlow,
             'mqm': MqmWorkFlow}
