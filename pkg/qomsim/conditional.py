"""
Conditional Gaussian states of a continuously monitored test mass: Riccati moment equations, closed-form and
algebraic-Riccati steady states, classical-noise conditional covariances and purity figures of merit.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_continuous_are

from qomsim.base import DomainError, NumericalError
from qomsim.core import HBAR, GaussianState

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

## the free-mass conditional formulas need Omega_q >> omega_m
FREE_MASS_RATIO = 10.
RICCATI_RTOL = 1e-10
RICCATI_ATOL = 1e-13


@dataclass(frozen=True)
class RiccatiState:
    t: float
    v_xx: float
    v_xp: float
    v_pp: float

    def to_gaussian(self, mean_x=0.0, mean_p=0.0):
        return GaussianState(mean_x, mean_p, self.v_xx, self.v_xp, self.v_pp)

    @classmethod
    def from_gaussian(cls, state, t=0.0):
        return cls(t, state.v_xx, state.v_xp, state.v_pp)


@dataclass(frozen=True)
class ConditionalFoM:
    """
    Purity U = (2/hbar) sqrt(det V), linear entropy 1 - 1/U, effective occupation U/2 - 1/2 and von Neumann
    entropy (N+1) ln(N+1) - N ln N of the thermal state with the same purity.
    """
    purity: float
    linear_entropy: float
    n_eff: float
    von_neumann: float

    @classmethod
    def from_purity(cls, purity):
        n_eff = max(purity / 2. - 0.5, 0.)
        if n_eff == 0:
            entropy = 0.0
        else:
            entropy = (n_eff + 1) * np.log(n_eff + 1) - n_eff * np.log(n_eff)
        return cls(float(purity), float(1 - 1. / purity), float(n_eff), float(entropy))

    @classmethod
    def from_state(cls, state):
        return cls.from_purity(state.purity)


@dataclass(frozen=True)
class ConditionalState:
    """
    Conditional covariance under measurement with classical noise, with its figures of merit and the
    optimal measurement strength sqrt(Omega_x Omega_F), where N_eff reaches Omega_F/Omega_x.
    """
    state: GaussianState
    fom: ConditionalFoM
    regime_ok: bool
    sub_sql_window: bool
    optimal_omega_q: float
    n_eff_min: float


@dataclass(frozen=True)
class MomentTrack:
    """
    Deterministic evolution of first and second moments sampled at times t.
    """
    t: np.ndarray
    mean_x: np.ndarray
    mean_p: np.ndarray
    v_xx: np.ndarray
    v_xp: np.ndarray
    v_pp: np.ndarray

    def state(self, k):
        return GaussianState(float(self.mean_x[k]), float(self.mean_p[k]), float(self.v_xx[k]),
                             float(self.v_xp[k]), float(self.v_pp[k]))

    @property
    def final(self):
        return self.state(-1)

    def determinant(self):
        return self.v_xx * self.v_pp - self.v_xp ** 2


def riccati_rhs(state, mech, alpha, sensing_factor=1.0, diffusion=0.0):
    """
    Time derivatives of the conditional covariance in SI units.

    V'_xx = 2 V_xp/M - 2 (alpha^2/X) V_xx^2
    V'_xp = V_pp/M - M omega_m^2 V_xx - 2 gamma_m V_xp - 2 (alpha^2/X) V_xx V_xp
    V'_pp = -2 M omega_m^2 V_xp - 4 gamma_m V_pp + hbar^2 alpha^2/2 + D - 2 (alpha^2/X) V_xp^2
    Args:
        state: RiccatiState or GaussianState
        mech: MechanicalParams
        alpha: float, measurement strength, alpha^2 = M Omega_q^2 / hbar
        sensing_factor: float, X = 1 + 2 xi_x^2 from classical sensing noise
        diffusion: float, D, extra momentum diffusion from classical force noise (S_F/2)

    Returns: np.ndarray (V'_xx, V'_xp, V'_pp)
    """
    if alpha < 0:
        raise DomainError("alpha must be nonnegative, got %r" % alpha)
    m, w, g = mech.mass, mech.omega_m, mech.gamma_m
    gain = 2 * alpha ** 2 / sensing_factor
    v_xx, v_xp, v_pp = state.v_xx, state.v_xp, state.v_pp
    return np.array([2 * v_xp / m - gain * v_xx ** 2,
                     v_pp / m - m * w ** 2 * v_xx - 2 * g * v_xp - gain * v_xx * v_xp,
                     -2 * m * w ** 2 * v_xp - 4 * g * v_pp + HBAR ** 2 * alpha ** 2 / 2 + diffusion - gain * v_xp ** 2])


def riccati_rhs_normalized(v, w, g, lam, sensing_factor=1.0, diffusion=0.0, information=True):
    """
    The same equations with hbar = M = 1 and frequencies in units of a scale Omega_s:
    w = omega_m/Omega_s, g = gamma_m/Omega_s, lam = Omega_q/Omega_s.
    """
    v_xx, v_xp, v_pp = v
    gain = 2 * lam ** 2 / sensing_factor if information else 0.
    return np.array([2 * v_xp - gain * v_xx ** 2,
                     v_pp - w ** 2 * v_xx - 2 * g * v_xp - gain * v_xx * v_xp,
                     -2 * w ** 2 * v_xp - 4 * g * v_pp + lam ** 2 / 2 + diffusion - gain * v_xp ** 2])


def _frequency_scale(mech, omega_q, duration=None):
    scale = max(omega_q, mech.omega_m, mech.gamma_m)
    if scale == 0:
        if not duration:
            raise DomainError("no frequency scale: omega_m = gamma_m = Omega_q = 0")
        scale = 1. / duration
    return scale


def evolve_moments(mech, omega_q, initial, duration, sensing_factor=1.0, diffusion=0.0, information=True,
                   t_eval=None):
    """
    Integrate the moment equations in normalized units with an adaptive Runge-Kutta method (DOP853).

    With information=True the covariance follows the conditional Riccati equation; with information=False the
    measurement only adds back-action diffusion, as for an unread record. Means follow the drift.
    Args:
        mech: MechanicalParams
        omega_q: float, measurement strength (rad/s)
        initial: GaussianState
        duration: float, model time (s)
        sensing_factor: float, X = 1 + 2 xi_x^2
        diffusion: float, extra momentum diffusion D (SI)
        information: Bool, keep the information-gain terms
        t_eval: array of times in [0, duration]; by default the end points only

    Returns: MomentTrack
    """
    if duration < 0:
        raise DomainError("duration must be nonnegative, got %r" % duration)
    scale = _frequency_scale(mech, omega_q, duration)
    x0 = np.sqrt(HBAR / (mech.mass * scale))
    p0 = np.sqrt(HBAR * mech.mass * scale)
    w, g, lam = mech.omega_m / scale, mech.gamma_m / scale, omega_q / scale
    d = diffusion / (HBAR * mech.mass * scale ** 2)

    def rhs(_, y):
        mx, mp = y[0], y[1]
        dv = riccati_rhs_normalized(y[2:], w, g, lam, sensing_factor, d, information)
        return np.concatenate(([mp, -w ** 2 * mx - 2 * g * mp], dv))

    y0 = np.array([initial.mean_x / x0, initial.mean_p / p0, initial.v_xx / x0 ** 2, initial.v_xp / HBAR,
                   initial.v_pp / p0 ** 2])
    if t_eval is None:
        t_eval = np.array([0., duration])
    t_eval = np.asarray(t_eval, dtype=float)
    if duration == 0:
        y = np.repeat(y0[:, None], t_eval.size, axis=1)
    else:
        solution = solve_ivp(rhs, (0., duration * scale), y0, method='DOP853', t_eval=t_eval * scale,
                             rtol=RICCATI_RTOL, atol=RICCATI_ATOL)
        if not solution.success:
            raise NumericalError("moment integration failed: %s" % solution.message)
        y = solution.y
    return MomentTrack(t_eval, y[0] * x0, y[1] * p0, y[2] * x0 ** 2, y[3] * HBAR, y[4] * p0 ** 2)


def riccati_integrate(mech, omega_q, initial, duration, sensing_factor=1.0, diffusion=0.0, t_eval=None):
    """
    Conditional covariance after `duration` seconds of continuous measurement.

    Returns: list of RiccatiState at the requested times
    """
    track = evolve_moments(mech, omega_q, initial, duration, sensing_factor, diffusion, True, t_eval)
    return [RiccatiState(float(t), float(a), float(b), float(c))
            for t, a, b, c in zip(track.t, track.v_xx, track.v_xp, track.v_pp)]


def riccati_steady_state(mech, omega_q, free_mass=False):
    """
    Closed-form steady state of the conditional covariance of an undamped oscillator under pure quantum noise.
    Args:
        mech: MechanicalParams
        omega_q: float, measurement strength (rad/s)
        free_mass: Bool, default is False. If True, the strong-measurement limit
            (hbar/(sqrt2 M Omega_q), hbar/2, hbar M Omega_q/sqrt2) is returned.

    Returns: GaussianState, always pure
    """
    m, w = mech.mass, mech.omega_m
    if mech.gamma_m > 0:
        logger.warning("riccati_steady_state ignores gamma_m; use kalman_steady_state for a damped oscillator")
    if free_mass:
        if not omega_q > 0:
            raise DomainError("the free-mass steady state needs Omega_q > 0")
        return GaussianState(0., 0., HBAR / (np.sqrt(2) * m * omega_q), HBAR / 2, HBAR * m * omega_q / np.sqrt(2))
    if w == 0:
        raise DomainError("omega_m = 0 has no closed-form steady state; pass free_mass=True")
    lam4 = (omega_q / w) ** 4
    root = np.sqrt(1 + lam4)
    v_xx = HBAR / (np.sqrt(2) * m * w) / np.sqrt(1 + root)
    v_xp = HBAR / 2 * np.sqrt(lam4) / (1 + root)
    v_pp = HBAR * m * w / np.sqrt(2) * root / np.sqrt(1 + root)
    return GaussianState(0., 0., v_xx, v_xp, v_pp)


def conditional_covariance_with_noise(mech, meas):
    """
    Conditional covariance of a test mass measured at Omega_q >> omega_m with classical force noise
    (xi_F = Omega_F/Omega_q) and sensing noise (xi_x = Omega_q/Omega_x).
    Args:
        mech: MechanicalParams
        meas: MeasurementParams

    Returns: ConditionalState
    """
    omega_q = meas.omega_q
    if not omega_q > 0:
        raise DomainError("Omega_q must be positive for a conditional state")
    regime_ok = omega_q >= FREE_MASS_RATIO * mech.omega_m
    if not regime_ok:
        logger.warning("free-mass conditional formulas used at Omega_q/omega_m = %.3g < %g",
                       omega_q / mech.omega_m, FREE_MASS_RATIO)
    x, f = meas.sensing_factor, meas.force_factor
    m = mech.mass
    v_xx = HBAR / (np.sqrt(2) * m * omega_q) * x ** 0.75 * f ** 0.25
    v_xp = HBAR / 2 * np.sqrt(x * f)
    v_pp = HBAR * m * omega_q / np.sqrt(2) * x ** 0.25 * f ** 0.75
    state = GaussianState(0., 0., v_xx, v_xp, v_pp)

    sub_sql_window = meas.omega_x > 2 * meas.omega_f
    if not sub_sql_window:
        logger.warning("classical noise reaches the SQL (Omega_x <= 2 Omega_F): no sub-SQL window")
    if meas.omega_f == 0:
        optimal_omega_q, n_eff_min = 0.0, 0.0
    elif math.isinf(meas.omega_x):
        optimal_omega_q, n_eff_min = math.inf, 0.0
    else:
        optimal_omega_q, n_eff_min = np.sqrt(meas.omega_x * meas.omega_f), meas.omega_f / meas.omega_x
    return ConditionalState(state, ConditionalFoM.from_purity(np.sqrt(x * f)), bool(regime_ok),
                            bool(sub_sql_window), float(optimal_omega_q), float(n_eff_min))


def purity_from_spectra(s_zz, s_ff, s_zf=0.0):
    """
    U = sqrt(S_ZZ S_FF - S_ZF^2)/hbar, the conditional purity for white readout noise at any omega_m.
    """
    argument = s_zz * s_ff - s_zf ** 2
    if argument < 0:
        raise NumericalError("unphysical spectra: S_ZZ S_FF - S_ZF^2 = %g < 0" % argument)
    purity = np.sqrt(argument) / HBAR
    if purity < 1 - 1e-9:
        logger.warning("spectra violate the Heisenberg bound: U = %.6g < 1", purity)
    return float(purity)


def cavity_bandwidth_occupation(omega_q_cav, gamma):
    "N_eff ~ Omega_q/(4 sqrt2 gamma) from a finite cavity bandwidth, valid for Omega_q <~ gamma"
    if not gamma > 0:
        raise DomainError("cavity half bandwidth must be positive, got %r" % gamma)
    if omega_q_cav > gamma:
        logger.warning("cavity-bandwidth occupation used outside its range: Omega_q/gamma = %.3g",
                       omega_q_cav / gamma)
    return omega_q_cav / (4 * np.sqrt(2) * gamma)


def kalman_steady_state(mech, s_zz, s_ff, s_zf=0.0):
    """
    Steady-state Kalman covariance of a damped oscillator read out with white noise, from the algebraic Riccati
    equation A V + V A^T - (V H^T + N) R^{-1} (H V + N^T) + Q = 0 in normalized units.
    Args:
        mech: MechanicalParams
        s_zz: float, single-sided sensing noise (m^2/Hz)
        s_ff: float, single-sided total force noise (N^2/Hz)
        s_zf: float, real cross spectrum (m N/Hz)

    Returns: GaussianState
    """
    if not (s_zz > 0 and np.isfinite(s_zz)):
        raise DomainError("S_ZZ must be positive and finite, got %r" % s_zz)
    if s_ff < 0:
        raise DomainError("S_FF must be nonnegative, got %r" % s_ff)
    m = mech.mass
    scale = max((s_ff / s_zz) ** 0.25 / np.sqrt(m), mech.omega_m)
    if scale == 0:
        raise DomainError("no force noise on a free mass: the conditional state does not settle")
    x0_sq = HBAR / (m * scale)
    p0_sq = HBAR * m * scale
    w, g = mech.omega_m / scale, mech.gamma_m / scale
    q = np.diag([0., s_ff / (2 * HBAR * m * scale ** 2)])
    r = np.array([[s_zz * m * scale ** 2 / (2 * HBAR)]])
    n = np.array([[0.], [s_zf / (2 * HBAR)]])
    a = np.array([[0., 1.], [-w ** 2, -2 * g]])
    h = np.array([[1., 0.]])
    try:
        v = solve_continuous_are(a.T, h.T, q, r, s=n)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError("algebraic Riccati equation failed: %s" % e)
    return GaussianState(0., 0., v[0, 0] * x0_sq, 0.5 * (v[0, 1] + v[1, 0]) * HBAR, v[1, 1] * p0_sq)
