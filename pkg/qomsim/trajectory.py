"""
Monte-Carlo trajectories of a continuously measured test mass. The conditional state stays Gaussian: the
covariance follows the deterministic Riccati equation and the means obey Ito SDEs driven by the innovations.
"""
import logging
from dataclasses import dataclass
from multiprocessing.pool import ThreadPool

import numpy as np
import pandas as pd
from scipy.linalg import expm

from qomsim.base import DomainError
from qomsim.conditional import conditional_covariance_with_noise, evolve_moments, kalman_steady_state
from qomsim.core import HBAR, GaussianState, MeasurementParams, MechanicalParams, WienerSource, db_to_squeeze
from qomsim.utils import get_n_threads, time_bar
from qomsim.verification import tomography_error

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

FORCE_NOISE_MODES = ('resolved', 'filtered')
STEP_BOUND = 0.01
## breathing windows run this far past the decoherence horizon
HORIZON_MARGIN = 1.05
## noise columns of a WienerSource draw
MEASUREMENT, FORCE, BACK_ACTION = 0, 1, 2

## breathing scenarios in units of sqrt(Omega_x Omega_F): preparation, spring and verification frequencies
BREATHING_SCENARIOS = {
    1: {'omega_q': 0.23, 'omega_opt': 1.2, 'omega_q_verify': 3.0},
    2: {'omega_q': 2.5, 'omega_opt': 0.8, 'omega_q_verify': 3.0},
}


@dataclass(frozen=True)
class TrajectoryRecord:
    """
    One realization: record increments dy[k] over [t[k], t[k+1]) and the conditional moments at t[k]. Hidden
    coordinates are filled when the trajectory carries a classical stand-in for the true state.
    """
    t: np.ndarray
    dy: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    v_xx: np.ndarray
    v_xp: np.ndarray
    v_pp: np.ndarray
    seed: int
    index: int
    hidden_x: np.ndarray = None
    hidden_p: np.ndarray = None

    def to_frame(self):
        columns = {'t': self.t, 'dy': self.dy, 'mean_x': self.mean_x, 'mean_p': self.mean_p,
                   'v_xx': self.v_xx, 'v_xp': self.v_xp, 'v_pp': self.v_pp}
        if self.hidden_x is not None:
            columns['hidden_x'] = self.hidden_x
            columns['hidden_p'] = self.hidden_p
        return pd.DataFrame(columns)

    def state(self, k):
        return GaussianState(float(self.mean_x[k]), float(self.mean_p[k]), float(self.v_xx[k]),
                             float(self.v_xp[k]), float(self.v_pp[k]))


@dataclass(frozen=True)
class BreathingCurve:
    """
    Verified position variance of a state prepared by conditioning, evolved in an optical spring and read out
    by back-action-evading tomography.
    """
    tau: np.ndarray
    delta_x_sq: np.ndarray
    vacuum: float
    prepared: GaussianState
    v_add_xx: float

    @property
    def below_vacuum(self):
        return self.delta_x_sq < self.vacuum

    @property
    def dips(self):
        "Number of contiguous stretches below the vacuum level"
        below = self.below_vacuum.astype(int)
        return int(below[0] + np.count_nonzero(np.diff(below) == 1))

    def to_frame(self):
        return pd.DataFrame({'tau_s': self.tau, 'delta_x_sq': self.delta_x_sq,
                             'vacuum': np.full_like(self.tau, self.vacuum)})


def _check_step(mech, meas, dt):
    fastest = max(mech.omega_m, meas.omega_q)
    if not dt > 0:
        raise DomainError("time step must be positive, got %r" % dt)
    if fastest > 0 and dt > STEP_BOUND / fastest:
        raise DomainError("time step too large: dt = %g > %g/max(omega_m, Omega_q) = %g"
                          % (dt, STEP_BOUND, STEP_BOUND / fastest))


def default_initial_state(mech, meas, force_noise='resolved'):
    "Steady conditional state of the record, zero means"
    s_zz = HBAR * meas.sensing_factor / (mech.mass * meas.omega_q ** 2)
    s_ff = HBAR * mech.mass * meas.omega_q ** 2
    if force_noise == 'filtered':
        s_ff += meas.force_noise(mech.mass)
    return kalman_steady_state(mech, s_zz, s_ff)


class ConditionalSimulation:
    """
    Ensemble of conditional trajectories sharing one covariance track.

    dy = alpha <x> dt + sqrt(X/2) dW
    d<x> = <p>/M dt + sqrt(2/X) alpha V_xx dW
    d<p> = (-M omega_m^2 <x> - 2 gamma_m <p> - k_x <x> - k_p <p>) dt + sqrt(2/X) alpha V_xp dW [+ sqrt(S_F/2) dW_F]

    The linear drift is propagated exactly over a step and the noise enters with Ito increments. In 'resolved'
    mode the classical force kicks the means; in 'filtered' mode it is folded into the covariance. With
    hidden=True a classical stand-in for the true state is drawn from the initial Gaussian, driven by
    back-action and force noise, and the record is generated from it.
    """

    def __init__(self, mech, meas, duration, dt, seed=0, initial=None, stride=1, force_noise='resolved',
                 feedback=(0., 0.), hidden=False, source=None, refine=1):
        if force_noise not in FORCE_NOISE_MODES:
            raise DomainError("force_noise must be one of %s, got '%s'" % (', '.join(FORCE_NOISE_MODES), force_noise))
        if hidden and force_noise != 'filtered':
            raise DomainError("a hidden true state needs force_noise = 'filtered'")
        if not meas.omega_q > 0:
            raise DomainError("Omega_q must be positive to simulate a measurement record")
        if int(stride) < 1:
            raise DomainError("stride must be a positive integer, got %r" % stride)
        _check_step(mech, meas, dt)
        self._mech = mech
        self._meas = meas
        self._dt = float(dt)
        self._n_steps = int(round(duration / dt))
        if self._n_steps < 1:
            raise DomainError("duration %g is shorter than one step %g" % (duration, dt))
        self._seed = int(seed)
        self._stride = int(stride)
        self._force_noise = force_noise
        self._feedback = (float(feedback[0]), float(feedback[1]))
        self._hidden = hidden
        self._source = WienerSource(seed, dt, refine) if source is None else source
        self._initial = default_initial_state(mech, meas, force_noise) if initial is None else initial
        self._track = None

    @property
    def times(self):
        return np.arange(self._n_steps + 1) * self._dt

    def covariance_track(self):
        "Riccati covariance at every step, computed once"
        if self._track is None:
            diffusion = self._meas.force_noise(self._mech.mass) / 2 if self._force_noise == 'filtered' else 0.
            self._track = evolve_moments(self._mech, self._meas.omega_q, self._initial, self._n_steps * self._dt,
                                         sensing_factor=self._meas.sensing_factor, diffusion=diffusion,
                                         information=True, t_eval=self.times)
        return self._track

    def _propagator(self):
        m, w, g = self._mech.mass, self._mech.omega_m, self._mech.gamma_m
        kx, kp = self._feedback
        free = np.array([[0., 1. / m], [-m * w ** 2, -2 * g]])
        control = np.array([[0., 0.], [kx, kp]])
        generator = np.zeros((4, 4))
        generator[:2, :2] = free
        generator[:2, 2:] = -control
        generator[2:, 2:] = free - control
        return expm(generator * self._dt)

    def run_one(self, index):
        """
        Integrate trajectory `index`.
        Returns: TrajectoryRecord
        """
        mech, meas, dt, n = self._mech, self._meas, self._dt, self._n_steps
        track = self.covariance_track()
        alpha = meas.alpha(mech.mass)
        x_factor = meas.sensing_factor
        record_noise = np.sqrt(x_factor / 2)
        gain = alpha * np.sqrt(2 / x_factor)
        force_amplitude = np.sqrt(meas.force_noise(mech.mass) / 2)
        back_action_amplitude = HBAR * alpha / np.sqrt(2)
        propagator = self._propagator()

        noise = self._source.increments(index, n, 3)
        state = np.zeros(4)
        state[2:] = (self._initial.mean_x, self._initial.mean_p)
        if self._hidden:
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([self._seed, int(index), 1])))
            state[:2] = rng.multivariate_normal(state[2:], self._initial.covariance)

        dy = np.zeros(n + 1)
        means = np.zeros((n + 1, 2))
        hidden = np.zeros((n + 1, 2))
        means[0] = state[2:]
        hidden[0] = state[:2]
        for k in range(n):
            dw = noise[k]
            if self._hidden:
                dy[k] = alpha * state[0] * dt + record_noise * dw[MEASUREMENT]
                innovation = (dy[k] - alpha * state[2] * dt) / record_noise
            else:
                dy[k] = alpha * state[2] * dt + record_noise * dw[MEASUREMENT]
                innovation = dw[MEASUREMENT]
            kick = gain * np.array([track.v_xx[k], track.v_xp[k]]) * innovation
            state = propagator @ state
            state[2:] += kick
            if self._hidden:
                state[1] += back_action_amplitude * dw[BACK_ACTION] + force_amplitude * dw[FORCE]
            elif self._force_noise == 'resolved':
                state[3] += force_amplitude * dw[FORCE]
            means[k + 1] = state[2:]
            hidden[k + 1] = state[:2]

        keep = slice(None, None, self._stride)
        return TrajectoryRecord(self.times[keep], dy[keep], means[keep, 0], means[keep, 1], track.v_xx[keep],
                                track.v_xp[keep], track.v_pp[keep], self._seed, int(index),
                                hidden[keep, 0] if self._hidden else None,
                                hidden[keep, 1] if self._hidden else None)

    def run(self, n_traj=1, n_threads=None, verbose=False):
        """
        Integrate trajectories 0..n_traj-1 on a thread pool; records come back in index order.
        """
        if int(n_traj) < 1:
            raise DomainError("n_traj must be at least 1, got %r" % n_traj)
        self.covariance_track()
        n_threads = get_n_threads(n_threads)
        async_result = {}
        pool = ThreadPool(processes=n_threads)
        for index in range(int(n_traj)):
            async_result[index] = pool.apply_async(self.run_one, (index,))
        pool.close()
        pool.join()
        records = []
        for index in range(int(n_traj)):
            records.append(async_result[index].get())
            if verbose:
                time_bar(index, int(n_traj))
        return records


def simulate_conditional(mech, meas, duration, dt, seed=0, n_traj=1, initial=None, stride=1,
                         force_noise='resolved', feedback=(0., 0.), hidden=False, source=None, refine=1,
                         n_threads=None, verbose=False):
    """
    Simulate an ensemble of conditional trajectories.
    Args:
        mech: MechanicalParams
        meas: MeasurementParams
        duration: float, model time (s)
        dt: float, step (s), at most 0.01/max(omega_m, Omega_q)
        seed: int, key of the Wiener source
        n_traj: int, number of trajectories
        initial: GaussianState, default the steady conditional state with zero means
        stride: int, keep every stride-th step
        force_noise: str, 'resolved' or 'filtered'
        feedback: (k_x, k_p), linear feedback force -k_x <x> - k_p <p>
        hidden: Bool, carry a classical stand-in for the true state
        source: object with increments(index, n_steps, n_noises); a WienerSource by default
        refine: int, substeps summed into each increment of the default source
        n_threads: int, size of the worker pool
        verbose: Bool, show a progress bar

    Returns: list of TrajectoryRecord
    """
    simulation = ConditionalSimulation(mech, meas, duration, dt, seed, initial, stride, force_noise, feedback,
                                       hidden, source, refine)
    logger.info("simulating %d trajectories of %d steps", n_traj, simulation._n_steps)
    return simulation.run(n_traj, n_threads, verbose)


def ensemble_statistics(records):
    """
    Per-time ensemble statistics: variance of the conditional means next to the conditional covariance, and the
    empirical covariance of the residuals against hidden states when available.
    """
    mean_x = np.array([r.mean_x for r in records])
    mean_p = np.array([r.mean_p for r in records])
    first = records[0]
    stats = {'t': first.t,
             'var_mean_x': mean_x.var(axis=0, ddof=1) if len(records) > 1 else np.zeros_like(first.t),
             'cov_mean_xp': np.mean((mean_x - mean_x.mean(0)) * (mean_p - mean_p.mean(0)), axis=0),
             'var_mean_p': mean_p.var(axis=0, ddof=1) if len(records) > 1 else np.zeros_like(first.t),
             'v_xx': first.v_xx, 'v_xp': first.v_xp, 'v_pp': first.v_pp}
    if first.hidden_x is not None:
        residual_x = np.array([r.hidden_x - r.mean_x for r in records])
        residual_p = np.array([r.hidden_p - r.mean_p for r in records])
        stats['residual_xx'] = np.mean(residual_x ** 2, axis=0)
        stats['residual_xp'] = np.mean(residual_x * residual_p, axis=0)
        stats['residual_pp'] = np.mean(residual_p ** 2, axis=0)
    return pd.DataFrame(stats)


def filter_record(record, wiener, mech, meas):
    """
    Offline estimate of <x> from a stored record with the steady-state Wiener kernel.
    Args:
        record: TrajectoryRecord stored with stride 1
        wiener: WienerFilter built for the record spectra
    """
    dt = record.t[1] - record.t[0]
    z = record.dy / (meas.alpha(mech.mass) * dt)
    return wiener.estimate(z[:-1], dt)


def unconditional_evolve(mech, alpha, initial, duration, diffusion=0.0, t_eval=None):
    """
    Moments of a monitored test mass whose record is discarded: the measurement only adds the back-action
    diffusion hbar^2 alpha^2/2 to V_pp.
    Args:
        mech: MechanicalParams
        alpha: float, measurement strength
        initial: GaussianState
        duration: float (s)
        diffusion: float, extra momentum diffusion D
        t_eval: times at which to return the moments

    Returns: GaussianState at `duration`, or a MomentTrack when t_eval is given
    """
    if alpha < 0:
        raise DomainError("alpha must be nonnegative, got %r" % alpha)
    omega_q = alpha * np.sqrt(HBAR / mech.mass)
    track = evolve_moments(mech, omega_q, initial, duration, diffusion=diffusion, information=False,
                           t_eval=t_eval)
    if t_eval is None:
        return track.final
    return track


def thermal_spread(mass, omega, diffusion, tau):
    """
    Covariance added by momentum diffusion D (dV_pp/dt = D) to an oscillator at omega over a time tau.
    """
    tau = np.asarray(tau, dtype=float)
    if omega == 0:
        return diffusion * tau ** 3 / (3 * mass ** 2), diffusion * tau ** 2 / (2 * mass), diffusion * tau
    v_xx = diffusion / (mass ** 2 * omega ** 2) * (tau / 2 - np.sin(2 * omega * tau) / (4 * omega))
    v_xp = diffusion * np.sin(omega * tau) ** 2 / (2 * mass * omega ** 2)
    v_pp = diffusion * (tau / 2 + np.sin(2 * omega * tau) / (4 * omega))
    return v_xx, v_xp, v_pp


def rotate_covariance(state, mass, omega, tau):
    "Free evolution of the covariance of an oscillator at omega over times tau"
    tau = np.asarray(tau, dtype=float)
    if omega == 0:
        c, s_over, ms = np.ones_like(tau), tau / mass, np.zeros_like(tau)
    else:
        c, s_over, ms = np.cos(omega * tau), np.sin(omega * tau) / (mass * omega), \
            mass * omega * np.sin(omega * tau)
    v_xx = c ** 2 * state.v_xx + 2 * c * s_over * state.v_xp + s_over ** 2 * state.v_pp
    v_xp = -c * ms * state.v_xx + (c ** 2 - ms * s_over) * state.v_xp + c * s_over * state.v_pp
    v_pp = ms ** 2 * state.v_xx - 2 * ms * c * state.v_xp + c ** 2 * state.v_pp
    return v_xx, v_xp, v_pp


def three_stage_experiment(mech, prep, omega_opt, verify, tau, monitor_b1=True, evolve_omega_q=None):
    """
    Preparation by conditioning, free evolution in an optical spring and verification by tomography. During the
    evolution V_pp grows at the force-noise rate 2 hbar M Omega_F^2.
    Args:
        mech: MechanicalParams of the test mass during preparation
        prep: MeasurementParams of the preparation stage; its Omega_F also drives the evolution stage
        omega_opt: float, optical spring frequency of the evolution stage (rad/s)
        verify: MeasurementParams of the verification stage
        tau: array of evolution times (s)
        monitor_b1: Bool, default is True. If False the back-action of the spring carrier heats the mass.
        evolve_omega_q: float, measurement strength of the spring carrier, prep.omega_q by default

    Returns: BreathingCurve
    """
    if prep is None or verify is None or omega_opt is None:
        raise DomainError("three-stage experiment needs preparation, evolution and verification parameters")
    if not omega_opt > 0:
        raise DomainError("omega_opt must be positive, got %r" % omega_opt)
    m = mech.mass
    prepared = conditional_covariance_with_noise(mech, prep).state
    diffusion = evolution_diffusion(mech, prep, monitor_b1, evolve_omega_q)
    v_xx, _, _ = rotate_covariance(prepared, m, omega_opt, tau)
    th_xx, _, _ = thermal_spread(m, omega_opt, diffusion, tau)
    added = tomography_error(mech, verify)
    delta_x_sq = v_xx + th_xx + added.v_xx
    return BreathingCurve(np.asarray(tau, dtype=float), delta_x_sq, HBAR / (2 * m * omega_opt), prepared,
                          added.v_xx)


def evolution_diffusion(mech, prep, monitor_b1=True, evolve_omega_q=None):
    "Momentum diffusion of the evolution stage: force noise, plus the carrier back-action when b1 is discarded"
    diffusion = prep.force_noise(mech.mass)
    if not monitor_b1:
        carrier = prep.omega_q if evolve_omega_q is None else evolve_omega_q
        diffusion += HBAR * mech.mass * carrier ** 2 / 2
    return diffusion


def decoherence_horizon(mech, prep, omega_opt, verify, monitor_b1=True, evolve_omega_q=None):
    """
    Evolution time after which Delta x^2 stays above the vacuum level: the smallest rotated variance plus the
    verification noise plus the lower bound D (tau/2 - 1/(4 omega))/(M omega)^2 of the thermal spread reaches
    hbar/(2 M omega). Dips are only possible before it.

    Returns: float (s), 0 when the prepared state never dips
    """
    m = mech.mass
    diffusion = evolution_diffusion(mech, prep, monitor_b1, evolve_omega_q)
    if not diffusion > 0:
        raise DomainError("no decoherence horizon without force noise in the evolution stage")
    prepared = conditional_covariance_with_noise(mech, prep).state
    scale = m * omega_opt
    ## rotated v_xx(theta) is the quadratic form of this matrix on (cos, sin)
    shape = np.array([[prepared.v_xx, prepared.v_xp / scale], [prepared.v_xp / scale, prepared.v_pp / scale ** 2]])
    smallest = np.linalg.eigvalsh(shape)[0]
    gap = HBAR / (2 * scale) - smallest - tomography_error(mech, verify).v_xx
    if gap <= 0:
        return 0.0
    return float(2 * (gap * scale ** 2 / diffusion + 1. / (4 * omega_opt)))


def breathing_scenario(number, mass=1.0, omega_f=1.0, ratio=50., squeeze_db=10., periods=None,
                       points_per_period=400):
    """
    Predefined breathing experiment with Omega_x = ratio Omega_F; frequencies of BREATHING_SCENARIOS are in units
    of sqrt(Omega_x Omega_F).
    Args:
        periods: float, evolution window in spring periods. By default the window runs past the decoherence
            horizon so that the dip count is final.
        points_per_period: int, sampling of the evolution time
    """
    if number not in BREATHING_SCENARIOS:
        raise DomainError("unknown breathing scenario %r, choose from %s" % (number, sorted(BREATHING_SCENARIOS)))
    scenario = BREATHING_SCENARIOS[number]
    omega_x = ratio * omega_f
    unit = np.sqrt(omega_x * omega_f)
    mech = MechanicalParams(mass)
    prep = MeasurementParams(scenario['omega_q'] * unit, omega_f=omega_f, omega_x=omega_x)
    verify = MeasurementParams(scenario['omega_q_verify'] * unit, omega_f=omega_f, omega_x=omega_x,
                               squeeze=db_to_squeeze(squeeze_db))
    omega_opt = scenario['omega_opt'] * unit
    period = 2 * np.pi / omega_opt
    if periods is None:
        periods = max(HORIZON_MARGIN * decoherence_horizon(mech, prep, omega_opt, verify) / period, 1.)
    n_points = max(int(np.ceil(periods * points_per_period)), 1) + 1
    tau = np.linspace(0., periods * period, n_points)
    return three_stage_experiment(mech, prep, omega_opt, verify, tau)
