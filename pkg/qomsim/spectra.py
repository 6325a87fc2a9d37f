"""
Quantum-noise spectra of the tuned and detuned strawman interferometer: SQL curves, input-output relations,
squeezed and variational readout, optical rigidity and classical-noise budgets.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar

from qomsim.base import DomainError
from qomsim.core import HBAR, SpectrumCurve, squeezed_quadrature_spectra

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

REFERRED_UNITS = {'force': 'N^2/Hz', 'displacement': 'm^2/Hz', 'strain': '1/Hz'}
BUDGET_COLUMNS = ('omega_rad_s', 'shot', 'back_action', 'force_cl', 'sensing_cl', 'total', 'sql')

## the adiabatic elimination is flagged once |Omega| exceeds this fraction of sqrt(gamma^2 + Delta^2)
ADIABATIC_VALIDITY_LIMIT = 0.3


def _positive_grid(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("frequencies must be positive")
    return omega


@dataclass(frozen=True)
class KimbleFactor:
    omega: np.ndarray
    kappa: np.ndarray
    beta: np.ndarray

    @property
    def phase_factor(self):
        "e^{2i beta} = (Omega - i gamma)/(Omega + i gamma)"
        return np.exp(2j * self.beta)


@dataclass(frozen=True)
class OpticalSpring:
    """
    Radiation-pressure rigidity K(Omega) ~ K_0 + i Omega K_1 of a detuned cavity, with e^{-i Omega t} time
    dependence. K_1 > 0 is anti-damping.
    """
    k0: float
    k1: float
    omega: np.ndarray = None
    k: np.ndarray = None

    def low_frequency(self, omega):
        return self.k0 + 1j * np.asarray(omega) * self.k1


@dataclass(frozen=True)
class StabilityVerdict:
    k0_total: float
    k1_total: float
    omega_sq_eff: float
    gamma_eff: float
    roots: np.ndarray
    stable: bool


@dataclass(frozen=True)
class NoiseBudget:
    """
    Noise budget referred to force, displacement or strain. total is the pointwise sum of the four components.
    """
    shot: SpectrumCurve
    back_action: SpectrumCurve
    force_classical: SpectrumCurve
    sensing_classical: SpectrumCurve
    total: SpectrumCurve
    sql: SpectrumCurve
    referred: str

    @classmethod
    def from_components(cls, omega, shot, back_action, force_classical, sensing_classical, sql, referred):
        units = REFERRED_UNITS[referred]
        total = shot + back_action + force_classical + sensing_classical
        back_action = np.asarray(back_action, dtype=float)
        return cls(SpectrumCurve(omega, shot, units),
                   SpectrumCurve(omega, back_action, units, auto=bool(np.all(back_action >= 0))),
                   SpectrumCurve(omega, force_classical, units),
                   SpectrumCurve(omega, sensing_classical, units),
                   SpectrumCurve(omega, total, units),
                   SpectrumCurve(omega, sql, units),
                   referred)

    @property
    def omega(self):
        return self.total.omega

    def to_frame(self, omega_scale=1.0, spectrum_scale=1.0):
        """
        Budget as a table with the columns of BUDGET_COLUMNS. Both axes are divided by the given scales, so that
        omega_scale = gamma and spectrum_scale = S_SQL(gamma) give the normalized overlay of a noise figure.
        """
        values = [self.omega / omega_scale] + [c.values / spectrum_scale for c in
                                               (self.shot, self.back_action, self.force_classical,
                                                self.sensing_classical, self.total, self.sql)]
        return pd.DataFrame(dict(zip(BUDGET_COLUMNS, values)))


@dataclass(frozen=True)
class ClassicalBeat:
    """
    Minimum of S_cl/S_SQL over frequency for a free mass, analytic and numerical.
    """
    ratio: float
    omega_min: float
    ratio_numeric: float
    omega_min_numeric: float

    @property
    def amplitude_factor(self):
        "SQL-beating factor in amplitude, 1/sqrt(ratio)"
        if self.ratio == 0:
            return math.inf
        return 1. / np.sqrt(self.ratio)

    @property
    def beats_sql(self):
        return self.ratio < 1


@dataclass(frozen=True)
class DetunedIO:
    """
    Adiabatically eliminated detuned cavity: b1 = a1, b2 = a2 + alpha x and
    -M (Omega^2 - omega_opt^2) x = hbar alpha a1 + F.
    """
    omega: np.ndarray
    mass: float
    omega_opt_sq: float
    alpha: float
    omega_q: float
    kappa: np.ndarray
    validity_ratio: np.ndarray

    @property
    def omega_opt(self):
        if self.omega_opt_sq < 0:
            raise DomainError("optical spring makes the test mass unstable: omega_opt^2 = %g < 0" % self.omega_opt_sq)
        return np.sqrt(self.omega_opt_sq)

    @property
    def is_valid(self):
        return bool(np.all(self.validity_ratio <= ADIABATIC_VALIDITY_LIMIT))

    def readout_coefficients(self, zeta):
        """
        Coefficients of a1, a2 and of the external force F in the readout quadrature b1 cos(zeta) + b2 sin(zeta).
        """
        c, s = np.cos(zeta), np.sin(zeta)
        response = -1. / (self.mass * (self.omega ** 2 - self.omega_opt_sq))
        return c - self.kappa * s, s * np.ones_like(self.omega), self.alpha * s * response

    def readout_noise(self, zeta=np.pi / 2, force_spectrum=0.0):
        """
        Vacuum quantum noise of the b_zeta readout referred to an external force, plus any classical force noise.
        """
        if np.sin(zeta) == 0:
            raise DomainError("readout angle with sin(zeta) = 0 carries no signal")
        c_a1, c_a2, c_f = self.readout_coefficients(zeta)
        return (np.abs(c_a1) ** 2 + np.abs(c_a2) ** 2) / np.abs(c_f) ** 2 + force_spectrum


def sql_force(mech, omega):
    "S_SQL^F = 2 hbar M |Omega^2 - omega_m^2|"
    omega = _positive_grid(omega)
    return 2 * HBAR * mech.mass * np.abs(omega ** 2 - mech.omega_m ** 2)


def sql_displacement(mech, omega):
    """
    S_SQL^x = 2 hbar / (M |Omega^2 - omega_m^2|); inf at resonance, written out as the '+inf' sentinel.
    """
    omega = _positive_grid(omega)
    detuning = np.abs(omega ** 2 - mech.omega_m ** 2)
    with np.errstate(divide='ignore'):
        return np.where(detuning == 0, np.inf, 2 * HBAR / (mech.mass * np.where(detuning == 0, 1., detuning)))


def sql_strain(mech, omega, length):
    "S_SQL^h = 2 hbar |Omega^2 - omega_m^2| / (M Omega^4 L^2)"
    if not length > 0:
        raise DomainError("arm length must be positive, got %r" % length)
    omega = _positive_grid(omega)
    return 2 * HBAR * np.abs(omega ** 2 - mech.omega_m ** 2) / (mech.mass * omega ** 4 * length ** 2)


def _response_sq(mech, omega):
    "M^2 (Omega^2 - omega_m^2)^2, force to displacement conversion"
    return mech.mass ** 2 * (omega ** 2 - mech.omega_m ** 2) ** 2


def susceptibility(mech, omega):
    "chi = 1 / (M (omega_m^2 - Omega^2 - 2 i gamma_m Omega))"
    omega = np.asarray(omega, dtype=float)
    return 1. / (mech.mass * (mech.omega_m ** 2 - omega ** 2 - 2j * mech.gamma_m * omega))


def kimble_factor(opt, mech, omega):
    """
    Coupling constant K and phase beta of a tuned cavity.
    Args:
        opt: OpticalParams with zero detuning
        mech: MechanicalParams
        omega: array of sideband frequencies (rad/s)

    Returns: KimbleFactor
    """
    if opt.detuning != 0:
        raise DomainError("kimble_factor needs a tuned cavity (detuning = 0); use detuned_io")
    omega = _positive_grid(omega)
    theta_cubed = opt.theta_cubed(mech.mass)
    with np.errstate(divide='ignore'):
        kappa = 2 * theta_cubed * opt.gamma / ((omega ** 2 - mech.omega_m ** 2) * (omega ** 2 + opt.gamma ** 2))
    beta = -np.arctan(opt.gamma / omega)
    return KimbleFactor(omega, kappa, beta)


def variational_angle(kappa):
    "Readout angle with cot(zeta) = K, which cancels back-action in a lossless tuned readout"
    return np.arctan2(1., kappa)


def tuned_readout_noise(opt, mech, meas, omega, zeta=None, referred='force'):
    """
    Quantum and classical noise of a tuned interferometer read out at b_zeta = b1 cos(zeta) + b2 sin(zeta).

    The squeezed input of `meas` is propagated through b1 = a1 e^{2i beta}, b2 = (a2 - K a1) e^{2i beta} + signal
    and a lumped readout loss adds eps/(1-eps) vacuum. Classical force and sensing noise come from the corner
    frequencies of `meas`.
    Args:
        opt: OpticalParams, tuned
        mech: MechanicalParams
        meas: MeasurementParams; zeta, squeeze, squeeze_angle, loss, omega_f and omega_x are used
        omega: array of frequencies (rad/s)
        zeta: float or array, overrides meas.zeta, e.g. variational_angle(K)
        referred: str, 'force', 'displacement' or 'strain'

    Returns: NoiseBudget
    """
    if referred not in REFERRED_UNITS:
        raise DomainError("referred must be one of %s, got '%s'" % (', '.join(REFERRED_UNITS), referred))
    if meas.loss >= 1:
        raise DomainError("loss = 1 leaves no signal at the readout")
    zeta = meas.zeta if zeta is None else zeta
    s = np.sin(zeta)
    if np.any(np.isclose(s, 0, atol=1e-15)):
        raise DomainError("readout angle with sin(zeta) = 0 carries no signal")

    kimble = kimble_factor(opt, mech, omega)
    omega = kimble.omega
    kappa = kimble.kappa
    s_a1, s_a2, s_a12 = squeezed_quadrature_spectra(meas.squeeze, meas.squeeze_angle)
    c1 = np.cos(zeta) - kappa * s
    loss_term = meas.loss / (1 - meas.loss)

    s_sql = sql_force(mech, omega)
    scale = s_sql / (2 * np.abs(kappa) * s ** 2)
    shot = scale * (s ** 2 * s_a2 + loss_term)
    back_action = scale * (c1 ** 2 * s_a1 + 2 * c1 * s * s_a12)
    force_cl = meas.force_noise(mech.mass) * np.ones_like(omega)
    sensing_cl = meas.sensing_noise(mech.mass) * _response_sq(mech, omega)

    if referred != 'force':
        response = _response_sq(mech, omega)
        shot, back_action, force_cl, sensing_cl = [v / response for v in (shot, back_action, force_cl, sensing_cl)]
        s_sql = sql_displacement(mech, omega)
        if referred == 'strain':
            shot, back_action, force_cl, sensing_cl = [v / opt.length ** 2
                                                       for v in (shot, back_action, force_cl, sensing_cl)]
            s_sql = sql_strain(mech, omega, opt.length)
    return NoiseBudget.from_components(omega, shot, back_action, force_cl, sensing_cl, s_sql, referred)


def bae_loss_limit(squeeze, loss):
    """
    Loss-limited sensitivity of any back-action-evading scheme, sqrt(S/S_SQL) >= (e^{-2q} eps)^{1/4}.
    """
    if squeeze < 0:
        raise DomainError("squeeze factor must be nonnegative, got %r" % squeeze)
    if not 0 <= loss <= 1:
        raise DomainError("loss must lie in [0, 1], got %r" % loss)
    return (np.exp(-2 * squeeze) * loss) ** 0.25


def detuned_io(opt, mech, omega):
    """
    Adiabatically eliminate the cavity mode of a detuned cavity.
    Args:
        opt: OpticalParams
        mech: MechanicalParams
        omega: array of frequencies (rad/s)

    Returns: DetunedIO with omega_opt^2 = omega_m^2 - Theta^3 Delta/(gamma^2 + Delta^2),
        Omega_q^2 = 2 Theta^3 gamma/(gamma^2 + Delta^2) and alpha = Omega_q sqrt(M/hbar)
    """
    if not opt.gamma > 0:
        raise DomainError("cavity half bandwidth must be positive")
    omega = np.asarray(omega, dtype=float)
    theta_cubed = opt.theta_cubed(mech.mass)
    denominator = opt.gamma ** 2 + opt.detuning ** 2
    omega_opt_sq = mech.omega_m ** 2 - theta_cubed * opt.detuning / denominator
    omega_q = np.sqrt(2 * theta_cubed * opt.gamma / denominator)
    alpha = omega_q * np.sqrt(mech.mass / HBAR)
    with np.errstate(divide='ignore'):
        kappa = omega_q ** 2 / (omega ** 2 - omega_opt_sq)
    validity_ratio = np.abs(omega) / np.sqrt(denominator)
    if np.any(validity_ratio > ADIABATIC_VALIDITY_LIMIT):
        logger.warning("adiabatic elimination used at |Omega|/sqrt(gamma^2 + Delta^2) = %.3g",
                       float(np.max(validity_ratio)))
    return DetunedIO(omega, mech.mass, float(omega_opt_sq), float(alpha), float(omega_q), kappa, validity_ratio)


def spring_from_theta(theta_cubed, detuning, gamma, mass, omega=None):
    """
    Optical spring of a cavity with coupling Theta^3, detuning and half bandwidth gamma.
    K(Omega) = -M Theta^3 Delta / (Delta^2 + gamma^2 - 2 i gamma Omega - Omega^2)
    """
    denominator = detuning ** 2 + gamma ** 2
    k0 = -mass * theta_cubed * detuning / denominator
    k1 = -2 * mass * theta_cubed * detuning * gamma / denominator ** 2
    k = None
    if omega is not None:
        omega = np.asarray(omega, dtype=float)
        k = -mass * theta_cubed * detuning / (denominator - 2j * gamma * omega - omega ** 2)
    return OpticalSpring(k0, k1, omega, k)


def optical_spring(opt, mech, omega=None):
    return spring_from_theta(opt.theta_cubed(mech.mass), opt.detuning, opt.gamma, mech.mass, omega)


def spring_shift(opt, mech):
    """
    Shifted (omega_m^2, gamma_m) of the oscillator under the low-frequency optical spring.
    """
    spring = optical_spring(opt, mech)
    return mech.omega_m ** 2 + spring.k0 / mech.mass, mech.gamma_m - spring.k1 / (2 * mech.mass)


def double_spring_stability(spring_a, spring_b, mech):
    """
    Stability of an oscillator under two optical springs.

    The verdict follows from the coefficients of M s^2 + (2 M gamma_m - K_1) s + (M omega_m^2 + K_0); the roots
    of that characteristic polynomial are returned as well.
    """
    k0 = spring_a.k0 + spring_b.k0
    k1 = spring_a.k1 + spring_b.k1
    omega_sq_eff = mech.omega_m ** 2 + k0 / mech.mass
    gamma_eff = mech.gamma_m - k1 / (2 * mech.mass)
    roots = np.roots([mech.mass, 2 * mech.mass * mech.gamma_m - k1, mech.mass * mech.omega_m ** 2 + k0])
    stable = bool(omega_sq_eff > 0 and gamma_eff > 0)
    logger.debug("composite spring: omega^2 = %g, gamma = %g, stable = %s", omega_sq_eff, gamma_eff, stable)
    return StabilityVerdict(k0, k1, omega_sq_eff, gamma_eff, roots, stable)


def classical_beat(meas):
    """
    min over Omega of S_cl/S_SQL = 2 Omega_F/Omega_x for a free mass, reached at Omega = sqrt(Omega_F Omega_x),
    cross-checked with a bounded scalar minimization in log frequency.
    """
    omega_f, omega_x = meas.omega_f, meas.omega_x
    if omega_f == 0 or math.isinf(omega_x):
        return ClassicalBeat(0.0, math.inf, 0.0, math.inf)
    ratio = 2 * omega_f / omega_x
    omega_min = np.sqrt(omega_f * omega_x)

    def log_ratio(u):
        w = np.exp(u)
        return w ** 2 / omega_x ** 2 + omega_f ** 2 / w ** 2

    centre = np.log(omega_min)
    result = minimize_scalar(log_ratio, bounds=(centre - 10, centre + 10), method='bounded',
                             options={'xatol': 1e-10})
    return ClassicalBeat(ratio, omega_min, float(result.fun), float(np.exp(result.x)))


def classical_noise_budget(mech, meas, omega):
    """
    Displacement-referred budget of a position measurement with classical noise,
    S_cl = (2 hbar / M) [1/Omega_x^2 + Omega_F^2 M^2/|chi^{-1}|^2].
    Args:
        mech: MechanicalParams
        meas: MeasurementParams
        omega: array of frequencies (rad/s)

    Returns: (NoiseBudget, ClassicalBeat)
    """
    omega = _positive_grid(omega)
    response = _response_sq(mech, omega)
    with np.errstate(divide='ignore'):
        if meas.omega_q == 0:
            shot = np.full_like(omega, np.inf)
        else:
            shot = np.full_like(omega, HBAR / (mech.mass * meas.omega_q ** 2))
        back_action = HBAR * mech.mass * meas.omega_q ** 2 / response
        force_cl = meas.force_noise(mech.mass) / response
    sensing_cl = np.full_like(omega, meas.sensing_noise(mech.mass))
    budget = NoiseBudget.from_components(omega, shot, back_action, force_cl, sensing_cl,
                                         sql_displacement(mech, omega), 'displacement')
    beat = classical_beat(meas)
    if not beat.beats_sql:
        logger.warning("classical noise does not beat the SQL anywhere: Omega_x <= 2 Omega_F")
    return budget, beat


def readout_spectra(mech, meas, zeta=None):
    """
    White noise spectra of a broadband homodyne position readout with measurement strength Omega_q.

    The readout b_zeta/(alpha sin zeta) = x + Z gives the sensing noise Z and the back-action force hbar alpha a1;
    squeezing, readout loss and classical noise are included.

    Returns: (S_ZZ, S_FF, S_ZF) in SI units
    """
    if meas.omega_q == 0:
        raise DomainError("Omega_q = 0: no measurement")
    if meas.loss >= 1:
        raise DomainError("loss = 1 leaves no signal at the readout")
    zeta = meas.zeta if zeta is None else zeta
    c, s = np.cos(zeta), np.sin(zeta)
    if np.isclose(s, 0, atol=1e-15):
        raise DomainError("readout angle with sin(zeta) = 0 carries no signal")
    s_a1, s_a2, s_a12 = squeezed_quadrature_spectra(meas.squeeze, meas.squeeze_angle)
    alpha_sq = mech.mass * meas.omega_q ** 2 / HBAR
    loss_term = meas.loss / (1 - meas.loss)
    s_zz = (c ** 2 * s_a1 + s ** 2 * s_a2 + 2 * c * s * s_a12 + loss_term) / (s ** 2 * alpha_sq) \
        + meas.sensing_noise(mech.mass)
    s_ff = HBAR ** 2 * alpha_sq * s_a1 + meas.force_noise(mech.mass)
    s_zf = HBAR * (c * s_a1 + s * s_a12) / s
    return float(s_zz), float(s_ff), float(s_zf)


def heisenberg_slack(s_zz, s_ff, s_zf=0.0):
    "S_ZZ S_FF - |S_ZF|^2 - hbar^2 - 2 hbar |Im S_ZF|, nonnegative for any linear measurement"
    return s_zz * s_ff - np.abs(s_zf) ** 2 - HBAR ** 2 - 2 * HBAR * np.abs(np.imag(s_zf))


def satisfies_heisenberg(s_zz, s_ff, s_zf=0.0, rtol=1e-9):
    return bool(np.all(heisenberg_slack(s_zz, s_ff, s_zf) >= -rtol * HBAR ** 2))


def sideband_asymmetry(s_z, alpha, s_x, im_chi, zero_point=False):
    """
    Output spectra of the red- and blue-detuned readout, S_O^(-/+) = S_Z + alpha^2 S_x -/+ 2 alpha^2 hbar Im chi.
    Args:
        zero_point: Bool, default is False. If True, s_x is replaced by the zero-point value 2 hbar Im chi.

    Returns: (S_O^-, S_O^+)
    """
    if zero_point:
        s_x = 2 * HBAR * np.asarray(im_chi)
    common = s_z + alpha ** 2 * s_x
    quantum = 2 * alpha ** 2 * HBAR * np.asarray(im_chi)
    return common - quantum, common + quantum


def asymmetry_occupation(i_plus, i_minus):
    "1/n = I_-/I_+ - 1"
    if not i_plus > 0:
        raise DomainError("sideband areas must be positive, got I_+ = %r" % i_plus)
    if i_minus <= i_plus:
        raise DomainError("unphysical sideband areas: I_- = %r <= I_+ = %r" % (i_minus, i_plus))
    return i_plus / (i_minus - i_plus)


@dataclass(frozen=True)
class PonderoSqueeze:
    squeeze: float
    omega_opt_over_omega_q: float
    omega_f_over_omega_opt: float


def pondero_squeeze_requirements(squeeze):
    """
    Tuning for ponderomotive squeezing by e^{-q}: omega_opt ~ e^{-q} Omega_q and Omega_F <~ e^{-2q} omega_opt.
    """
    if squeeze < 0:
        raise DomainError("target squeeze factor must be nonnegative, got %r" % squeeze)
    return PonderoSqueeze(squeeze, float(np.exp(-squeeze)), float(np.exp(-2 * squeeze)))


def pondero_squeeze_spectrum(zeta, omega_q, omega_opt, omega_f=0.0, exact=True):
    """
    Low-frequency spectrum of the b_zeta output quadrature of an optically trapped mass, vacuum = 1.

    exact: cos^2 + sin^2 (1 + k^2 + n) + 2 k sin cos with k = (Omega_q/omega_opt)^2 and
    n = 2 Omega_F^2 Omega_q^2 / omega_opt^4; otherwise the first order 1 + 2 k zeta.
    """
    if not omega_opt > 0:
        raise DomainError("omega_opt must be positive, got %r" % omega_opt)
    k = (omega_q / omega_opt) ** 2
    zeta = np.asarray(zeta, dtype=float)
    if not exact:
        return 1 + 2 * k * zeta
    thermal = 2 * omega_f ** 2 * omega_q ** 2 / omega_opt ** 4
    c, s = np.cos(zeta), np.sin(zeta)
    return c ** 2 + s ** 2 * (1 + k ** 2 + thermal) + 2 * k * s * c
