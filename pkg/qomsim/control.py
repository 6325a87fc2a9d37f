"""
Feedback and passive cooling: controlled steady states built from the conditional state, critical temperature of
feedback cooling, radiation-pressure damping, optical dilution and readout sweeps of the occupation number.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import pandas as pd
from scipy.linalg import solve_continuous_are, solve_continuous_lyapunov
from scipy.optimize import minimize_scalar

from qomsim.base import DomainError, NumericalError
from qomsim.conditional import kalman_steady_state
from qomsim.core import HBAR, K_B, GaussianState, fdt_force_spectrum, thermal_occupation
from qomsim.spectra import readout_spectra

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

STRONG_MEASUREMENT_OCCUPATION = 1. / np.sqrt(2)
## Omega_q search range around omega_m for the feedback-cooling optimum
OMEGA_Q_SEARCH = (1e-4, 1e4)
## homodyne angles and LQG control weights searched by feedback_recovery_gain
READOUT_ANGLES = 24
CONTROL_WEIGHTS = np.logspace(-8., 8., 33)


@dataclass(frozen=True)
class ControlledState:
    """
    Steady state under feedback with decay rate lam; the controlled state carries no x-p correlation.
    n_eff = U/2 - 1/2 with U = (2/hbar) sqrt(V_xx V_pp); n_eff_literal is the bare bracket
    (2/hbar)(sqrt(V_xx V_pp) + |V_xp|) of the conditional covariance.
    """
    v_xx: float
    v_pp: float
    lam: float
    n_eff: float
    n_eff_literal: float

    @property
    def v_xp(self):
        return 0.0

    @property
    def state(self):
        return GaussianState(0., 0., self.v_xx, 0., self.v_pp)

    def quadrature_variance(self, theta):
        return self.state.quadrature_variance(theta)


@dataclass(frozen=True)
class FeedbackCooling:
    omega_q: float
    n_eff: float
    critical_temperature: float
    scaling: float
    plateau: bool


@dataclass(frozen=True)
class RadiationDamping:
    gamma_opt: float
    n_opt: float
    validity_ratio: float


@dataclass(frozen=True)
class QfCriterion:
    required_qf: float
    occupation: float
    relaxation: float


@dataclass(frozen=True)
class FeedbackRecovery:
    """
    Occupation with radiation damping alone and with feedback, the readout strength, the optical damping rate, the
    weak-coupling estimate of the damped occupation and the conditional state at the best homodyne angle zeta.
    """
    n_damping: float
    n_feedback: float
    omega_q: float
    gamma_opt: float
    n_estimate: float
    n_conditional: float
    conditional: Optional[GaussianState]
    zeta: float


def _n_eff(v_xx, v_pp, v_xp=0.0):
    return float(np.sqrt(max(v_xx * v_pp - v_xp ** 2, 0.)) / HBAR - 0.5)


def controlled_state(cond, lam):
    """
    Controlled covariance V_xx^c + V_xp^c/lam, V_pp^c + lam V_xp^c for a feedback decay rate lam.
    lam must carry the sign of V_xp^c so that both additions are nonnegative.
    """
    if cond.v_xx == 0:
        raise DomainError("V_xx of the conditional state is zero: no finite feedback rate")
    if lam == 0:
        raise DomainError("feedback decay rate must be nonzero")
    if cond.v_xp * lam < 0:
        raise DomainError("feedback rate %g has the wrong sign for V_xp = %g" % (lam, cond.v_xp))
    v_xx = cond.v_xx + cond.v_xp / lam
    v_pp = cond.v_pp + lam * cond.v_xp
    literal = 2. / HBAR * (np.sqrt(cond.v_xx * cond.v_pp) + abs(cond.v_xp))
    return ControlledState(float(v_xx), float(v_pp), float(lam), _n_eff(v_xx, v_pp), float(literal))


def optimal_lambda(cond):
    "lam* = sqrt(V_pp/V_xx), signed like V_xp"
    if cond.v_xx == 0:
        raise DomainError("V_xx of the conditional state is zero: no finite feedback rate")
    lam = np.sqrt(cond.v_pp / cond.v_xx)
    return float(-lam if cond.v_xp < 0 else lam)


def optimal_controlled_state(cond):
    """
    Controlled state of least occupation that feedback on the conditional means can reach. Its noise ellipse
    touches the conditional one at the two antipodal angles with tan(theta) = 1/lam*.
    Args:
        cond: GaussianState, conditional covariance

    Returns: ControlledState
    """
    if not cond.is_physical():
        logger.warning("conditional covariance below the Heisenberg bound: det V = %g", cond.determinant)
    return controlled_state(cond, optimal_lambda(cond))


def lambda_sweep(cond, lams):
    "Occupation of the controlled state across feedback rates"
    return np.array([controlled_state(cond, lam).n_eff for lam in np.atleast_1d(lams)])


def critical_temperature(mech):
    "T_c = hbar omega_m Q_m / (2 sqrt2 k_B)"
    q = mech.quality_factor
    if not (q > 0 and mech.omega_m > 0):
        raise DomainError("critical temperature needs omega_m > 0 and Q_m > 0")
    return HBAR * mech.omega_m * q / (2 * np.sqrt(2) * K_B)


def controlled_occupation(mech, omega_q, s_ff_extra=0.0):
    """
    Occupation of the optimally controlled state of a thermal oscillator measured at Omega_q with a phase readout.
    """
    s_zz = HBAR / (mech.mass * omega_q ** 2)
    s_ff = HBAR * mech.mass * omega_q ** 2 + s_ff_extra
    if mech.gamma_m > 0 and mech.temperature > 0:
        s_ff += fdt_force_spectrum(mech, mech.gamma_m, mech.temperature, classical_limit=True)
    return optimal_controlled_state(kalman_steady_state(mech, s_zz, s_ff)).n_eff


def feedback_cooling_occupation(mech, omega_q=None):
    """
    Feedback-cooling occupation of a thermal oscillator.
    Args:
        mech: MechanicalParams with gamma_m, omega_m and temperature set
        omega_q: float, measurement strength. If None, the occupation is minimized over Omega_q.

    Returns: FeedbackCooling. Above T_c the optimum runs to Omega_q -> inf with n_eff -> 1/sqrt2.
    """
    t_c = critical_temperature(mech)
    ratio = mech.temperature / t_c
    plateau = ratio >= 1
    scaling = STRONG_MEASUREMENT_OCCUPATION if plateau else 2 ** -0.75 * np.sqrt(ratio)
    if omega_q is not None:
        if not omega_q > 0:
            raise DomainError("Omega_q must be positive, got %r" % omega_q)
        return FeedbackCooling(float(omega_q), controlled_occupation(mech, omega_q), float(t_c), float(scaling),
                               bool(plateau))
    if plateau:
        return FeedbackCooling(math.inf, STRONG_MEASUREMENT_OCCUPATION, float(t_c), float(scaling), True)
    low, high = np.log(OMEGA_Q_SEARCH[0] * mech.omega_m), np.log(OMEGA_Q_SEARCH[1] * mech.omega_m)
    result = minimize_scalar(lambda u: controlled_occupation(mech, np.exp(u)), bounds=(low, high),
                             method='bounded', options={'xatol': 1e-6})
    logger.debug("feedback cooling optimum at Omega_q/omega_m = %g", np.exp(result.x) / mech.omega_m)
    return FeedbackCooling(float(np.exp(result.x)), float(result.fun), float(t_c), float(scaling), False)


def radiation_damping(opt, mech):
    """
    Radiation-pressure damping of a detuned cavity near the resolved-sideband point Delta = omega_m:
    gamma_opt = hbar G^2/(2 M gamma omega_m) (1 - gamma^2/(4 Delta^2)) and n_opt = gamma^2/(4 Delta^2).
    """
    if opt.detuning == 0:
        raise DomainError("radiation damping needs a detuned cavity, Delta = 0 given")
    if not mech.omega_m > 0:
        raise DomainError("radiation damping needs omega_m > 0")
    ratio = opt.gamma / abs(opt.detuning)
    if ratio > 1:
        logger.warning("radiation damping formulas used outside the resolved-sideband regime: gamma/Delta = %.3g",
                       ratio)
    gamma_opt = HBAR * opt.coupling ** 2 / (2 * mech.mass * opt.gamma * mech.omega_m) * (1 - ratio ** 2 / 4)
    return RadiationDamping(float(gamma_opt), float(ratio ** 2 / 4), float(ratio))


def multi_bath_occupation(baths):
    "Damping-weighted occupation sum(gamma_j n_j)/sum(gamma_j) of baths given as (gamma_j, n_j) pairs"
    baths = list(baths)
    if not baths:
        raise DomainError("no baths given")
    gammas = np.array([b[0] for b in baths], dtype=float)
    occupations = np.array([b[1] for b in baths], dtype=float)
    if np.any(gammas < 0) or not gammas.sum() > 0:
        raise DomainError("bath damping rates must be nonnegative with a positive sum")
    return float(np.dot(gammas, occupations) / gammas.sum())


def qf_criterion(mech, dilution=1.0):
    """
    Ground-state benchmark Q_m f_m ~ k_B T_m / h, relaxed by the optical dilution (omega_opt/omega_m)^2.
    Args:
        mech: MechanicalParams with temperature, omega_m and gamma_m
        dilution: float, omega_opt/omega_m >= 1

    Returns: QfCriterion with the required Q f product, the occupation k_B T/(hbar omega_m Q_m)/dilution^2 and
        the relaxation factor dilution^2
    """
    if dilution < 1:
        raise DomainError("dilution omega_opt/omega_m must be at least 1, got %r" % dilution)
    relaxation = dilution ** 2
    required = K_B * mech.temperature / (2 * np.pi * HBAR) / relaxation
    q = mech.quality_factor
    if math.isinf(q) or mech.temperature == 0 or math.isinf(relaxation):
        occupation = 0.0
    else:
        if not mech.omega_m > 0:
            raise DomainError("occupation needs omega_m > 0")
        occupation = K_B * mech.temperature / (HBAR * mech.omega_m * q) / relaxation
    return QfCriterion(float(required), float(occupation), float(relaxation))


def _optomechanical_model(opt, mech):
    """
    Oscillator and cavity mode (x, p, a1, a2) in units of x0 = sqrt(hbar/(M omega_m)), p0 = sqrt(hbar M omega_m)
    and time 1/omega_m. Inputs are the vacuum quadratures of the cavity port and the thermal force.

    Returns: (drift A, diffusion Q, coupling g = G x0/omega_m)
    """
    n_th = thermal_occupation(mech.omega_m, mech.temperature)
    if math.isinf(n_th):
        raise DomainError("thermal occupation is infinite")
    x0 = np.sqrt(HBAR / (mech.mass * mech.omega_m))
    g = np.sqrt(mech.mass * opt.theta_cubed(mech.mass) / (2 * HBAR)) * x0 / mech.omega_m
    kappa, delta, damping = opt.gamma / mech.omega_m, opt.detuning / mech.omega_m, mech.gamma_m / mech.omega_m
    a = np.array([[0., 1., 0., 0.],
                  [-1., -2 * damping, np.sqrt(2) * g, 0.],
                  [0., 0., -kappa, delta],
                  [np.sqrt(2) * g, 0., -delta, -kappa]])
    q = np.diag([0., 4 * damping * (n_th + 0.5), kappa, kappa])
    if np.max(np.linalg.eigvals(a).real) >= 0:
        raise NumericalError("optomechanical system is unstable at detuning %g rad/s" % opt.detuning)
    return a, q, g


def _homodyne_filter(a, q, kappa, zeta):
    "Steady joint conditional covariance and innovation gain for the out-going quadrature b1 cos zeta + b2 sin zeta"
    root = np.sqrt(2 * kappa)
    h = np.array([[0., 0., root * np.cos(zeta), root * np.sin(zeta)]])
    n = np.array([[0.], [0.], [-root * np.cos(zeta) / 2], [-root * np.sin(zeta) / 2]])
    r = np.array([[0.5]])
    v = solve_continuous_are(a.T, h.T, q, r, s=n)
    return v, (v @ h.T + n) / r[0, 0]


def _mechanical_occupation(v):
    return float(np.sqrt(max(v[0, 0] * v[1, 1] - v[0, 1] ** 2, 0.)) - 0.5)


def feedback_recovery_gain(opt, mech):
    """
    Occupation of a detuned-cavity cooled oscillator with radiation damping alone and with feedback on its
    conditional state. Both follow from the linear model of the oscillator coupled to the cavity mode, which is
    read out at the best homodyne angle. Feedback is the linear-quadratic regulator of the mechanical energy over a
    range of control weights, no feedback included.

    Returns: FeedbackRecovery, with the mechanical block of the conditional state in SI units
    """
    if not mech.omega_m > 0:
        raise DomainError("feedback recovery needs omega_m > 0")
    n_th = thermal_occupation(mech.omega_m, mech.temperature)
    theta_cubed = opt.theta_cubed(mech.mass)
    if theta_cubed == 0:
        return FeedbackRecovery(float(n_th), float(n_th), 0., 0., float(n_th), float(n_th), None, 0.)
    damping = radiation_damping(opt, mech)
    estimate = multi_bath_occupation([(mech.gamma_m, n_th), (damping.gamma_opt, damping.n_opt)])
    omega_q = np.sqrt(2 * theta_cubed * opt.gamma / (opt.gamma ** 2 + opt.detuning ** 2))

    a, q, _ = _optomechanical_model(opt, mech)
    try:
        unconditional = solve_continuous_lyapunov(a, -q)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError("Lyapunov equation failed: %s" % e)
    n_damping = _mechanical_occupation(unconditional)

    force = np.array([[0.], [1.], [0.], [0.]])
    energy = np.diag([0.5, 0.5, 0., 0.])
    gains = [np.zeros((1, 4))]
    for weight in CONTROL_WEIGHTS:
        riccati = solve_continuous_are(a, force, energy, np.array([[weight]]))
        gains.append(-force.T @ riccati / weight)

    kappa = opt.gamma / mech.omega_m
    best = None
    for zeta in np.linspace(0., np.pi, READOUT_ANGLES, endpoint=False):
        try:
            v, k = _homodyne_filter(a, q, kappa, zeta)
        except (np.linalg.LinAlgError, ValueError) as e:
            logger.debug("homodyne filter failed at zeta = %g: %s", zeta, e)
            continue
        for gain in gains:
            means = solve_continuous_lyapunov(a + force @ gain, -0.5 * k @ k.T)
            n_feedback = _mechanical_occupation(v + means)
            if best is None or n_feedback < best[0]:
                best = (n_feedback, v, zeta)
    if best is None:
        raise NumericalError("no homodyne angle gave a conditional state")
    n_feedback, v, zeta = best
    scale = mech.mass * mech.omega_m
    cond = GaussianState(0., 0., HBAR / scale * v[0, 0], HBAR * v[0, 1], HBAR * scale * v[1, 1])
    if not cond.is_physical():
        raise NumericalError("conditional state violates the Heisenberg bound: det V = %g" % cond.determinant)
    return FeedbackRecovery(float(n_damping), float(n_feedback), float(omega_q), float(damping.gamma_opt),
                            float(estimate), _mechanical_occupation(v), cond, float(zeta))


def readout_angle_sweep(mech, meas, zetas):
    """
    Conditional and controlled occupation across homodyne angles, for the figure-of-merit curves.

    Returns: pd.DataFrame with columns zeta, n_eff_cond, n_eff_ctrl
    """
    rows = []
    for zeta in np.atleast_1d(zetas):
        s_zz, s_ff, s_zf = readout_spectra(mech, meas, zeta)
        cond = kalman_steady_state(mech, s_zz, s_ff, s_zf)
        rows.append({'zeta': float(zeta), 'n_eff_cond': _n_eff(cond.v_xx, cond.v_pp, cond.v_xp),
                     'n_eff_ctrl': optimal_controlled_state(cond).n_eff})
    return pd.DataFrame(rows, columns=['zeta', 'n_eff_cond', 'n_eff_ctrl'])


def squeezing_sweep(mech, meas, squeezes, zeta=None):
    """
    Conditional and controlled occupation across input squeeze factors q at a fixed readout angle.

    Returns: pd.DataFrame with columns squeeze, n_eff_cond, n_eff_ctrl
    """
    rows = []
    for q in np.atleast_1d(squeezes):
        s_zz, s_ff, s_zf = readout_spectra(mech, replace(meas, squeeze=float(q)), zeta)
        cond = kalman_steady_state(mech, s_zz, s_ff, s_zf)
        rows.append({'squeeze': float(q), 'n_eff_cond': _n_eff(cond.v_xx, cond.v_pp, cond.v_xp),
                     'n_eff_ctrl': optimal_controlled_state(cond).n_eff})
    return pd.DataFrame(rows, columns=['squeeze', 'n_eff_cond', 'n_eff_ctrl'])
