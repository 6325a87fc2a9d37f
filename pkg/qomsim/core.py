"""
Shared domain types, unit conventions and spectral primitives.

SI units with explicit hbar throughout. Spectra are single-sided; quadrature spectra are normalized so that
vacuum is 1.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

from qomsim.base import DomainError

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

HBAR = constants.hbar
K_B = constants.k
C = constants.c
G_NEWTON = constants.G

SPECTRUM_UNITS = ('m^2/Hz', 'N^2/Hz', '1/Hz', 'quadrature')


def wavelength_to_omega(wavelength):
    "Carrier angular frequency of a laser with the given wavelength in meters"
    return 2 * np.pi * C / wavelength


def db_to_squeeze(db):
    "10 dB of squeezing is e^{-2q} = 0.1"
    return db * np.log(10) / 20.


@dataclass(frozen=True)
class MechanicalParams:
    """
    Test-mass oscillator: mass (kg), eigenfrequency omega_m (rad/s), amplitude damping rate gamma_m (rad/s) and
    bath temperature (K). The momentum obeys dp = -M omega_m^2 x dt - 2 gamma_m p dt + forces.
    """
    mass: float
    omega_m: float = 0.0
    gamma_m: float = 0.0
    temperature: float = 0.0

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError("mass must be positive, got %r" % self.mass)
        if self.omega_m < 0:
            raise DomainError("omega_m must be nonnegative, got %r" % self.omega_m)
        if self.gamma_m < 0:
            raise DomainError("gamma_m must be nonnegative, got %r" % self.gamma_m)
        if self.temperature < 0:
            raise DomainError("temperature must be nonnegative, got %r" % self.temperature)

    @property
    def quality_factor(self):
        if self.gamma_m == 0:
            return math.inf
        return self.omega_m / (2 * self.gamma_m)

    @property
    def is_free_mass(self):
        return self.omega_m == 0

    def reduced(self, n):
        """
        Same oscillator with mass M/n, e.g. n = 4 for the differential mode of four identical mirrors.
        """
        if not n > 0:
            raise DomainError("mass reduction factor must be positive, got %r" % n)
        return replace(self, mass=self.mass / n)

    def with_frequency(self, omega_m):
        return replace(self, omega_m=omega_m)


@dataclass(frozen=True)
class OpticalParams:
    """
    Cavity (or arm cavities) probing the test mass.

    omega_0: carrier angular frequency (rad/s); detuning (rad/s); gamma: cavity half bandwidth (rad/s);
    length: cavity length (m); power: circulating power I_c per arm (W); n_arms: number of arms sharing the
    differential signal (1 for a single cavity, 2 for a Michelson with arm cavities).
    """
    omega_0: float
    detuning: float = 0.0
    gamma: float = 1.0
    length: float = 1.0
    power: float = 0.0
    n_arms: int = 1

    def __post_init__(self):
        if not self.gamma > 0:
            raise DomainError("cavity half bandwidth gamma must be positive, got %r" % self.gamma)
        if not self.length > 0:
            raise DomainError("cavity length must be positive, got %r" % self.length)
        if self.power < 0:
            raise DomainError("circulating power must be nonnegative, got %r" % self.power)
        if not self.omega_0 > 0:
            raise DomainError("carrier frequency must be positive, got %r" % self.omega_0)
        if self.n_arms < 1:
            raise DomainError("n_arms must be at least 1, got %r" % self.n_arms)

    @property
    def g(self):
        "Frequency pulling per unit length, omega_0/L"
        return self.omega_0 / self.length

    @property
    def stored_energy(self):
        return 2 * self.power * self.length / C

    @property
    def amplitude(self):
        "Classical intracavity amplitude A with E = hbar omega_0 A^2"
        return np.sqrt(self.stored_energy / (HBAR * self.omega_0))

    @property
    def coupling(self):
        "Linearized optomechanical coupling G = A g"
        return self.amplitude * self.g

    def theta_cubed(self, mass):
        """
        Theta^3 = 2 hbar G^2 / M, divided by n_arms; equals 4 omega_0 I_c / (n_arms M L c).
        """
        return 2 * HBAR * self.coupling ** 2 / (mass * self.n_arms)

    def theta(self, mass):
        return np.cbrt(self.theta_cubed(mass))

    def with_power(self, power):
        return replace(self, power=power)


def circulating_power_for(theta, omega_0, length, mass, n_arms=1):
    """
    Circulating power needed for a given Theta (rad/s): I_c = Theta^3 n_arms M L c / (4 omega_0).
    """
    return theta ** 3 * n_arms * mass * length * C / (4 * omega_0)


@dataclass(frozen=True)
class MeasurementParams:
    """
    Continuous position measurement of strength omega_q (alpha^2 = M omega_q^2 / hbar) read out at homodyne angle
    zeta, with classical force noise S_F = 2 hbar M omega_f^2, classical sensing noise S_x = 2 hbar / (M omega_x^2),
    input squeezing e^{-q} at angle squeeze_angle and lumped optical loss.
    """
    omega_q: float
    zeta: float = np.pi / 2
    omega_f: float = 0.0
    omega_x: float = math.inf
    squeeze: float = 0.0
    squeeze_angle: float = 0.0
    loss: float = 0.0

    def __post_init__(self):
        if self.omega_q < 0:
            raise DomainError("omega_q must be nonnegative, got %r" % self.omega_q)
        if self.omega_f < 0:
            raise DomainError("omega_f must be nonnegative, got %r" % self.omega_f)
        if not self.omega_x > 0:
            raise DomainError("omega_x must be positive (inf for no sensing noise), got %r" % self.omega_x)
        if self.squeeze < 0:
            raise DomainError("squeeze factor must be nonnegative, got %r" % self.squeeze)
        if not 0 <= self.loss <= 1:
            raise DomainError("loss must lie in [0, 1], got %r" % self.loss)

    @property
    def xi_f(self):
        if self.omega_f == 0:
            return 0.0
        if self.omega_q == 0:
            return math.inf
        return self.omega_f / self.omega_q

    @property
    def xi_x(self):
        return self.omega_q / self.omega_x

    @property
    def sensing_factor(self):
        "1 + 2 xi_x^2"
        return 1 + 2 * self.xi_x ** 2

    @property
    def force_factor(self):
        "1 + 2 xi_f^2"
        return 1 + 2 * self.xi_f ** 2

    def alpha(self, mass):
        "Measurement strength in SI units, 1/(m sqrt(s))"
        return self.omega_q * np.sqrt(mass / HBAR)

    def force_noise(self, mass):
        return 2 * HBAR * mass * self.omega_f ** 2

    def sensing_noise(self, mass):
        return 2 * HBAR / (mass * self.omega_x ** 2)

    def with_strength(self, omega_q):
        return replace(self, omega_q=omega_q)


@dataclass(frozen=True)
class SpectrumCurve:
    """
    Single-sided spectral density sampled on a strictly increasing grid of angular frequencies.
    """
    omega: np.ndarray
    values: np.ndarray
    units: str
    auto: bool = True

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values)
        object.__setattr__(self, 'omega', omega)
        object.__setattr__(self, 'values', values)
        if self.units not in SPECTRUM_UNITS:
            raise DomainError("unknown spectrum units '%s'" % self.units)
        if omega.ndim != 1 or omega.shape != values.shape:
            raise DomainError("frequency grid and values must be 1-d arrays of the same length")
        if omega.size > 1 and not np.all(np.diff(omega) > 0):
            raise DomainError("frequency grid must be strictly increasing")
        if self.auto and np.any(np.real(values) < 0):
            raise DomainError("auto-spectrum has negative values")

    def __add__(self, other):
        if self.units != other.units or not np.array_equal(self.omega, other.omega):
            raise DomainError("cannot add spectra on different grids or units")
        return SpectrumCurve(self.omega, self.values + other.values, self.units, self.auto and other.auto)

    def scaled(self, factor):
        return SpectrumCurve(self.omega, self.values * factor, self.units, self.auto)

    def amplitude(self):
        "Amplitude spectral density, sqrt(S)"
        return np.sqrt(self.values)


@dataclass(frozen=True)
class GaussianState:
    """
    First moments and covariance of a Gaussian state of one mechanical degree of freedom.
    """
    mean_x: float = 0.0
    mean_p: float = 0.0
    v_xx: float = 0.0
    v_xp: float = 0.0
    v_pp: float = 0.0

    @property
    def covariance(self):
        return np.array([[self.v_xx, self.v_xp], [self.v_xp, self.v_pp]])

    @property
    def determinant(self):
        return self.v_xx * self.v_pp - self.v_xp ** 2

    @property
    def purity(self):
        "U = (2/hbar) sqrt(det V); 1 for pure states"
        return 2. / HBAR * np.sqrt(max(self.determinant, 0.))

    def is_physical(self, tol=1e-9):
        if self.v_xx < 0 or self.v_pp < 0:
            return False
        return self.determinant >= HBAR ** 2 / 4 * (1 - tol)

    def quadrature_variance(self, theta):
        "Variance of x cos(theta) + p sin(theta) in the raw (x, p) coordinates"
        c, s = np.cos(theta), np.sin(theta)
        return self.v_xx * c ** 2 + 2 * self.v_xp * s * c + self.v_pp * s ** 2

    @classmethod
    def from_covariance(cls, covariance, mean_x=0.0, mean_p=0.0):
        covariance = np.asarray(covariance, dtype=float)
        return cls(mean_x, mean_p, covariance[0, 0], 0.5 * (covariance[0, 1] + covariance[1, 0]), covariance[1, 1])

    @classmethod
    def ground_state(cls, mech):
        if mech.omega_m == 0:
            raise DomainError("a free mass has no ground state")
        return cls(0., 0., HBAR / (2 * mech.mass * mech.omega_m), 0., HBAR * mech.mass * mech.omega_m / 2)

    def with_means(self, mean_x, mean_p):
        return replace(self, mean_x=mean_x, mean_p=mean_p)

    def scaled(self, factor):
        "Covariance multiplied by a factor, means kept"
        return replace(self, v_xx=self.v_xx * factor, v_xp=self.v_xp * factor, v_pp=self.v_pp * factor)


class WienerSource:
    """
    Counter-based source of Wiener increments. Each trajectory index owns an independent Philox stream keyed by
    (seed, index), so that ensembles are reproducible whatever the scheduling order.

    With refine > 1 every increment is the sum of `refine` finer increments of step dt/refine; sources with equal
    dt/refine share the same fine path.
    """

    def __init__(self, seed, dt, refine=1):
        if not dt > 0:
            raise DomainError("time step must be positive, got %r" % dt)
        if int(refine) < 1:
            raise DomainError("refine must be a positive integer, got %r" % refine)
        self._seed = int(seed)
        self._dt = float(dt)
        self._refine = int(refine)

    @property
    def seed(self):
        return self._seed

    @property
    def dt(self):
        return self._dt

    def generator(self, index=0):
        key = np.array([self._seed % 2 ** 64, int(index) % 2 ** 64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def increments(self, index, n_steps, n_noises=1):
        """
        Independent increments with mean 0 and variance dt.
        Returns: np.ndarray of shape (n_steps, n_noises)
        """
        fine_dt = self._dt / self._refine
        fine = self.generator(index).standard_normal((n_steps * self._refine, n_noises)) * np.sqrt(fine_dt)
        if self._refine == 1:
            return fine
        return fine.reshape(n_steps, self._refine, n_noises).sum(axis=1)


def vacuum_quadrature_spectra():
    "(S_a1, S_a2, S_a1a2) of the vacuum input field"
    return 1.0, 1.0, 0.0


def quadrature_covariance(squeeze=0.0, squeeze_angle=0.0, loss=0.0):
    """
    Quadrature covariance matrix (1-loss) R diag(e^{2q}, e^{-2q}) R^T + loss I, with R the counterclockwise
    rotation by squeeze_angle acting on (a1, a2).
    """
    if squeeze < 0:
        raise DomainError("squeeze factor must be nonnegative, got %r" % squeeze)
    if not 0 <= loss <= 1:
        raise DomainError("loss must lie in [0, 1], got %r" % loss)
    c, s = np.cos(squeeze_angle), np.sin(squeeze_angle)
    rotation = np.array([[c, -s], [s, c]])
    squeezed = rotation @ np.diag([np.exp(2 * squeeze), np.exp(-2 * squeeze)]) @ rotation.T
    return (1 - loss) * squeezed + loss * np.eye(2)


def squeezed_quadrature_spectra(squeeze, squeeze_angle, loss=0.0):
    """
    (S_a1, S_a2, S_a1a2) of a squeezed input after lumped loss.
    """
    covariance = quadrature_covariance(squeeze, squeeze_angle, loss)
    return float(covariance[0, 0]), float(covariance[1, 1]), float(covariance[0, 1])


def thermal_occupation(omega, temperature):
    "Bose-Einstein occupation 1/(e^{hbar omega / k_B T} - 1)"
    if temperature == 0:
        return 0.0
    if omega == 0:
        return math.inf
    return 1. / np.expm1(HBAR * omega / (K_B * temperature))


def fdt_force_spectrum(mech, gamma_j, temperature, classical_limit=False):
    """
    Force spectrum of a bath coupled through damping rate gamma_j at a given temperature.
    Args:
        mech: MechanicalParams
        gamma_j: float, damping rate of the bath (rad/s)
        temperature: float, bath temperature (K)
        classical_limit: Bool, default is False. If True, returns 8 M gamma_j k_B T.

    Returns: single-sided force spectrum S_F = 4 M gamma_j hbar omega_m coth(hbar omega_m / 2 k_B T), N^2/Hz
    """
    if gamma_j < 0:
        raise DomainError("bath damping rate must be nonnegative, got %r" % gamma_j)
    if temperature < 0:
        raise DomainError("bath temperature must be nonnegative, got %r" % temperature)
    if classical_limit:
        return 8 * mech.mass * gamma_j * K_B * temperature
    if temperature == 0:
        return 4 * mech.mass * gamma_j * HBAR * mech.omega_m
    if mech.omega_m == 0:
        raise DomainError("coth(hbar omega / 2 k_B T) is singular for omega_m = 0; pass classical_limit=True")
    x = HBAR * mech.omega_m / (2 * K_B * temperature)
    return 4 * mech.mass * gamma_j * HBAR * mech.omega_m / np.tanh(x)
