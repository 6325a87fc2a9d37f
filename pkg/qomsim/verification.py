"""
Verification of a prepared mechanical state: additive noise of back-action-evading tomography, the filter
constraint that removes back-action from the combined readout, pure phase-quadrature tomography, steering duals of
the tomography ellipse and the entanglement between the test mass and its out-going field.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.optimize import minimize

from qomsim.base import DomainError, NumericalError
from qomsim.conditional import FREE_MASS_RATIO, kalman_steady_state
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

## filters are integrated over span/Gamma
B2_SPAN = 40.
B2_POINTS = 4001


@dataclass(frozen=True)
class TomographyError:
    """
    Additive covariance of the reconstructed state and its determinant in units of hbar^2/4.
    """
    v_xx: float
    v_xp: float
    v_pp: float
    det_ratio: float
    sub_heisenberg: bool
    regime_ok: bool = True

    @classmethod
    def from_covariance(cls, v_xx, v_xp, v_pp, regime_ok=True):
        det_ratio = max(v_xx * v_pp - v_xp ** 2, 0.) / (HBAR ** 2 / 4)
        return cls(float(v_xx), float(v_xp), float(v_pp), float(det_ratio), bool(det_ratio < 1), bool(regime_ok))

    @property
    def covariance(self):
        return np.array([[self.v_xx, self.v_xp], [self.v_xp, self.v_pp]])

    @property
    def state(self):
        return GaussianState(0., 0., self.v_xx, self.v_xp, self.v_pp)


@dataclass(frozen=True)
class SteeringMeasures:
    ellipse: TomographyError
    steerability: float
    verifiable: float

    @property
    def steerable(self):
        return self.steerability > 0


def _shot_level(meas):
    "e^{-2q} of the injected squeezing, degraded by loss"
    if meas.loss == 1:
        return math.inf
    return math.exp(-2 * meas.squeeze) + meas.loss / (1 - meas.loss)


def tomography_error(mech, meas):
    """
    Additive noise of back-action-evading tomography at strength Omega_q, with Lambda_x = sqrt(xi_x^2 + e^{-2q}/2):

    V_xx = hbar/(sqrt2 M Omega_q) Lambda_x^{3/2} xi_F^{1/2}
    V_xp = -hbar Lambda_x xi_F / 2
    V_pp = hbar M Omega_q/sqrt2 Lambda_x^{1/2} xi_F^{3/2}

    so that det V / (hbar^2/4) = Lambda_x^2 xi_F^2 = (Omega_F/Omega_x)^2 + (e^{-2q}/2)(Omega_F/Omega_q)^2. The
    ellipse shape assumes Omega_q >> omega_m; the determinant holds for any omega_m.
    Args:
        mech: MechanicalParams
        meas: MeasurementParams of the verification stage

    Returns: TomographyError
    """
    omega_q = meas.omega_q
    if not omega_q > 0:
        raise DomainError("tomography needs Omega_q > 0")
    regime_ok = omega_q >= FREE_MASS_RATIO * mech.omega_m
    if not regime_ok:
        logger.warning("tomography ellipse used at Omega_q/omega_m = %.3g < %g; only its determinant is reliable",
                       omega_q / mech.omega_m, FREE_MASS_RATIO)
    xi_f = meas.xi_f
    lam = np.sqrt(meas.xi_x ** 2 + _shot_level(meas) / 2)
    m = mech.mass
    v_xx = HBAR / (np.sqrt(2) * m * omega_q) * lam ** 1.5 * np.sqrt(xi_f)
    v_xp = -HBAR * lam * xi_f / 2
    v_pp = HBAR * m * omega_q / np.sqrt(2) * np.sqrt(lam) * xi_f ** 1.5
    det_ratio = (lam * xi_f) ** 2
    return TomographyError(float(v_xx), float(v_xp), float(v_pp), float(det_ratio), bool(det_ratio < 1),
                           bool(regime_ok))


def _green(mech, tau):
    "Free response x(tau) to a unit impulse of force"
    if mech.omega_m == 0:
        return tau / mech.mass
    return np.sin(mech.omega_m * tau) / (mech.mass * mech.omega_m)


def _decay_rate(g, t):
    n = max(len(g) // 8, 2)
    last = np.sqrt(np.mean(g[-n:] ** 2))
    if last == 0:
        return math.inf
    previous = np.sqrt(np.mean(g[-2 * n:-n] ** 2))
    if not previous > last:
        raise DomainError("g2 does not decay over the grid; extend the grid or use a decaying filter")
    return np.log(previous / last) / (t[-n] - t[-2 * n])


def bae_filter(g2, t, mech, alpha):
    """
    Amplitude-quadrature filter g1 that removes back-action from the readout int (g1 b1 + g2 b2) dt:

    g1(t) = -(alpha^2/(M omega_m)) int_t^inf sin(omega_m (t' - t)) g2(t') dt'

    The integrals run with composite Simpson on the grid plus an analytic tail that continues g2 beyond the last
    sample with the decay rate of its final stretch.
    Args:
        g2: np.ndarray, phase-quadrature filter samples
        t: np.ndarray, increasing time grid (s)
        mech: MechanicalParams, only M and omega_m enter
        alpha: float, measurement strength

    Returns: np.ndarray, g1 on the same grid
    """
    g2 = np.asarray(g2, dtype=float)
    t = np.asarray(t, dtype=float)
    if g2.shape != t.shape or t.size < 16:
        raise DomainError("g2 and t must be matching arrays with at least 16 samples")
    if mech.gamma_m > 0:
        logger.warning("bae_filter ignores gamma_m = %g", mech.gamma_m)
    if not np.any(g2):
        return np.zeros_like(g2)
    decay = _decay_rate(g2, t)
    w, end, g_end = mech.omega_m, t[-1], g2[-1]

    def tail_integral(y, tail):
        cumulative = cumulative_simpson(y, x=t, initial=0.)
        return cumulative[-1] - cumulative + tail

    if w == 0:
        tail_0 = 0. if math.isinf(decay) else g_end / decay
        tail_1 = 0. if math.isinf(decay) else g_end * (end / decay + 1 / decay ** 2)
        moment_0 = tail_integral(g2, tail_0)
        moment_1 = tail_integral(t * g2, tail_1)
        return -(alpha ** 2 / mech.mass) * (moment_1 - t * moment_0)

    if math.isinf(decay):
        tail_s = tail_c = 0.
    else:
        norm = g_end / (decay ** 2 + w ** 2)
        tail_s = norm * (decay * np.sin(w * end) + w * np.cos(w * end))
        tail_c = norm * (decay * np.cos(w * end) - w * np.sin(w * end))
    i_s = tail_integral(np.sin(w * t) * g2, tail_s)
    i_c = tail_integral(np.cos(w * t) * g2, tail_c)
    return -(alpha ** 2 / (mech.mass * w)) * (np.cos(w * t) * i_s - np.sin(w * t) * i_c)


def backaction_transfer(g1, g2, t, mech, alpha):
    """
    Weight of the amplitude quadrature a1(t_j) in int (g1 b1 + g2 b2) dt, propagated directly through
    b1 = a1, b2 = a2 + alpha^2 int G(t - s) a1(s) ds with the free response G.
    """
    g1 = np.asarray(g1, dtype=float)
    g2 = np.asarray(g2, dtype=float)
    t = np.asarray(t, dtype=float)
    transfer = np.zeros_like(t)
    for j in range(t.size - 1):
        transfer[j] = alpha ** 2 * simpson(_green(mech, t[j:] - t[j]) * g2[j:], x=t[j:])
    return g1 + transfer


def backaction_residual(g1, g2, t, mech, alpha):
    "Back-action left in the combined readout relative to the phase-quadrature-only readout"
    compensated = backaction_transfer(g1, g2, t, mech, alpha)
    uncompensated = backaction_transfer(np.zeros_like(g2), g2, t, mech, alpha)
    norm = np.sqrt(simpson(uncompensated ** 2, x=t))
    if norm == 0:
        return 0.
    return float(np.sqrt(simpson(compensated ** 2, x=t)) / norm)


def b2_tomography_error(mech, meas, gamma, omega_b, n_points=B2_POINTS, span=B2_SPAN):
    """
    Error of reconstructing (x, p) at t = 0 from the phase quadrature alone, with filters in the span of
    e^{-gamma t} cos(omega_b t) and e^{-gamma t} sin(omega_b t). The best unbiased combination is used, so the
    result is the covariance (A^T C^-1 A)^-1 of the filter outputs.
    Args:
        mech: MechanicalParams
        meas: MeasurementParams, its sensing and force factors scale the shot and back-action noise
        gamma: float, filter decay rate (1/s)
        omega_b: float, filter frequency (rad/s)

    Returns: TomographyError
    """
    if not (gamma > 0 and omega_b >= 0):
        raise DomainError("filter needs gamma > 0 and omega_b >= 0, got %r, %r" % (gamma, omega_b))
    if not meas.omega_q > 0:
        raise DomainError("tomography needs Omega_q > 0")
    m, w = mech.mass, mech.omega_m
    alpha = meas.alpha(m)
    t = np.linspace(0., span / gamma, int(n_points))
    envelope = np.exp(-gamma * t)
    basis = [envelope * np.cos(omega_b * t), envelope * np.sin(omega_b * t)]
    if w == 0:
        signal = [np.ones_like(t), t / m]
    else:
        signal = [np.cos(w * t), np.sin(w * t) / (m * w)]
    design = alpha * np.array([[simpson(phi * s, x=t) for s in signal] for phi in basis])
    kicks = [bae_filter(phi, t, mech, alpha) for phi in basis]
    shot = meas.sensing_factor / 2 * np.array([[simpson(a * b, x=t) for b in basis] for a in basis])
    back_action = HBAR ** 2 / 2 * meas.force_factor * np.array([[simpson(a * b, x=t) for b in kicks]
                                                               for a in kicks])
    noise = shot + back_action
    try:
        information = design.T @ np.linalg.solve(noise, design)
        covariance = np.linalg.inv(information)
    except np.linalg.LinAlgError as e:
        raise NumericalError("degenerate phase-quadrature filters: %s" % e)
    return TomographyError.from_covariance(covariance[0, 0], 0.5 * (covariance[0, 1] + covariance[1, 0]),
                                           covariance[1, 1])


def _closed_loop_rates(mech, meas):
    s_zz = HBAR * meas.sensing_factor / (mech.mass * meas.omega_q ** 2)
    s_ff = HBAR * mech.mass * meas.omega_q ** 2 * meas.force_factor
    state = kalman_steady_state(mech, s_zz, s_ff)
    m, w, g = mech.mass, mech.omega_m, mech.gamma_m
    gain = 2 * meas.alpha(m) ** 2 / meas.sensing_factor
    closed = np.array([[-gain * state.v_xx, 1. / m], [-m * w ** 2 - gain * state.v_xp, -2 * g]])
    root = np.linalg.eigvals(closed)[0]
    return abs(root.real), abs(root.imag)


def optimize_b2_tomography(mech, meas, n_points=B2_POINTS):
    """
    Nelder-Mead search of the filter decay rate and frequency that minimize det V_add of phase-quadrature
    tomography, started from the closed-loop rates of the steady-state estimator.

    Returns: (TomographyError, gamma, omega_b)
    """
    gamma_0, omega_0 = _closed_loop_rates(mech, meas)
    omega_0 = max(omega_0, 1e-3 * gamma_0)

    def objective(params):
        return b2_tomography_error(mech, meas, np.exp(params[0]), np.exp(params[1]), n_points).det_ratio

    result = minimize(objective, np.log([gamma_0, omega_0]), method='Nelder-Mead',
                      options={'xatol': 1e-6, 'fatol': 1e-10})
    gamma, omega_b = np.exp(result.x)
    logger.debug("phase-quadrature tomography optimum at gamma = %g, omega_b = %g", gamma, omega_b)
    return b2_tomography_error(mech, meas, gamma, omega_b, n_points), float(gamma), float(omega_b)


def steering_measures(tomo):
    """
    Steering ellipse as the time reverse of the tomography ellipse (V_xp flips sign), the steerability
    S = -log(2 sqrt(det V)/hbar) and its verifiable bound -log(4 sqrt(V_xx V_pp)/hbar), natural log.
    Args:
        tomo: TomographyError, or any object with v_xx, v_xp, v_pp

    Returns: SteeringMeasures
    """
    ellipse = TomographyError.from_covariance(tomo.v_xx, -tomo.v_xp, tomo.v_pp, getattr(tomo, 'regime_ok', True))
    det = max(tomo.v_xx * tomo.v_pp - tomo.v_xp ** 2, 0.)
    steerability = math.inf if det == 0 else -np.log(2 * np.sqrt(det) / HBAR)
    product = tomo.v_xx * tomo.v_pp
    verifiable = math.inf if product <= 0 else -np.log(4 * np.sqrt(product) / HBAR)
    return SteeringMeasures(ellipse, float(steerability), float(verifiable))


def universal_entanglement(omega_q, omega_f):
    "Logarithmic negativity between the test mass and its out-going field, 1/2 log(1 + 25 Omega_q^2/(8 Omega_F^2))"
    if not omega_f > 0:
        raise DomainError("Omega_F must be positive, got %r" % omega_f)
    if omega_q < 0:
        raise DomainError("Omega_q must be nonnegative, got %r" % omega_q)
    return float(0.5 * np.log1p(25 * omega_q ** 2 / (8 * omega_f ** 2)))
