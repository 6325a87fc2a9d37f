"""
Closed-form figures of merit of multi-system protocols: teleportation of a mechanical state between two
oscillators through feedback, entanglement of two test masses prepared by conditioning and the strong-coupling
criterion of a single cavity. The teleportation formulas use hbar = M = 1.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from qomsim.base import DomainError
from qomsim.conditional import conditional_covariance_with_noise
from qomsim.core import HBAR, C, GaussianState, MechanicalParams, MeasurementParams, db_to_squeeze, wavelength_to_omega
from qomsim.trajectory import rotate_covariance, thermal_spread
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

## common mode measured at r Omega_q, differential mode at Omega_q / r
STRENGTH_SPLIT = 2.


@dataclass(frozen=True)
class TeleportParams:
    """
    Two oscillators at omega_opt coupled by feedback of gain eps_fb on a measurement of strength omega_q.
    Squeeze factor q and classical corners omega_f, omega_x as in MeasurementParams.
    """
    omega_opt: float
    omega_q: float
    eps_fb: float
    squeeze: float = 0.0
    omega_f: float = 0.0
    omega_x: float = math.inf

    def __post_init__(self):
        if not (self.omega_opt > 0 and self.omega_q > 0):
            raise DomainError("omega_opt and Omega_q must be positive")
        if self.eps_fb < 0:
            raise DomainError("feedback gain must be nonnegative, got %r" % self.eps_fb)
        if self.omega_opt ** 2 <= self.eps_fb * self.omega_q:
            raise DomainError("unstable normal mode: omega_opt^2 = %g must exceed eps_fb Omega_q = %g"
                              % (self.omega_opt ** 2, self.eps_fb * self.omega_q))

    @property
    def zeta_x(self):
        return np.sqrt(np.exp(-2 * self.squeeze) + 2 * (self.omega_q / self.omega_x) ** 2)

    @property
    def zeta_f(self):
        return np.sqrt(np.exp(-2 * self.squeeze) + 2 * (self.omega_f / self.omega_q) ** 2)


@dataclass(frozen=True)
class TeleportSloshing:
    omega_plus: float
    omega_minus: float
    omega_slosh: float
    tau_ex: float


@dataclass(frozen=True)
class TeleportNoise:
    """
    Added noise of the teleported state, hbar = M = 1. The diagonal form depends on how p is normalized, so only
    det and det_ratio = det/(hbar^2/4) are convention free.
    """
    v_xx: float
    v_pp: float
    det: float
    det_ratio: float

    def to_si(self, mass):
        return TeleportNoise(self.v_xx * HBAR / mass, self.v_pp * HBAR * mass, self.det * HBAR ** 2, self.det_ratio)


@dataclass(frozen=True)
class EntanglementWindow:
    omega_q: float
    survival_scale: float
    log_negativity: float
    n_eff_common: float
    n_eff_differential: float
    tomography_det_ratio: float
    feasible: bool


@dataclass(frozen=True)
class StrongCoupling:
    ratio: float
    momentum_ratio: float
    verdict: str


def teleport_sloshing(params):
    """
    Normal modes Omega_pm = sqrt(omega_opt^2 +- eps_fb Omega_q), sloshing frequency Omega_+ - Omega_- and exchange
    time pi/Omega_slosh (inf without coupling).
    """
    shift = params.eps_fb * params.omega_q
    omega_plus = np.sqrt(params.omega_opt ** 2 + shift)
    omega_minus = np.sqrt(params.omega_opt ** 2 - shift)
    slosh = omega_plus - omega_minus
    tau_ex = math.inf if slosh == 0 else np.pi / slosh
    return TeleportSloshing(float(omega_plus), float(omega_minus), float(slosh), float(tau_ex))


def teleport_added_noise(params):
    """
    V_add = (pi/8)(zeta_F Omega_q^2 + zeta_x eps_fb^2)/Omega_slosh diag(Omega_+^-2 + Omega_-^-2, 2).

    Returns: TeleportNoise
    """
    modes = teleport_sloshing(params)
    if modes.omega_slosh == 0:
        raise DomainError("no state exchange without feedback: eps_fb = 0")
    prefactor = np.pi / 8 * (params.zeta_f * params.omega_q ** 2 + params.zeta_x * params.eps_fb ** 2) \
        / modes.omega_slosh
    v_xx = prefactor * (modes.omega_plus ** -2 + modes.omega_minus ** -2)
    v_pp = 2 * prefactor
    det = v_xx * v_pp
    return TeleportNoise(float(v_xx), float(v_pp), float(det), float(4 * det))


def teleport_asymptote(omega_f, omega_x, squeeze=0.0):
    """
    det V_add/(hbar^2/4) = pi^2 (e^{-2q} + 2 Omega_F/Omega_x), reached at Omega_q = sqrt(Omega_x Omega_F) as
    omega_opt -> inf.
    """
    return float(np.pi ** 2 * (np.exp(-2 * squeeze) + 2 * omega_f / omega_x))


def optimize_teleport(omega_opt, omega_f, omega_x, squeeze=0.0):
    """
    Minimize det V_add over (Omega_q, eps_fb) at fixed omega_opt with Nelder-Mead, unstable points rejected.

    Returns: (TeleportParams, TeleportNoise)
    """
    if not (omega_f > 0 and omega_x > 0):
        raise DomainError("the teleportation optimum needs finite classical noise: Omega_F > 0, Omega_x > 0")
    omega_q = np.sqrt(omega_x * omega_f)
    ## zeta_x = zeta_F at this Omega_q, so the asymptotic eps_fb equals Omega_q
    eps = min(omega_q, 0.5 * omega_opt ** 2 / omega_q)

    def objective(u):
        try:
            params = TeleportParams(omega_opt, np.exp(u[0]), np.exp(u[1]), squeeze, omega_f, omega_x)
            return teleport_added_noise(params).det_ratio
        except DomainError:
            return math.inf

    result = minimize(objective, np.log([omega_q, eps]), method='Nelder-Mead',
                      options={'xatol': 1e-8, 'fatol': 1e-12, 'maxiter': 4000})
    best = TeleportParams(omega_opt, float(np.exp(result.x[0])), float(np.exp(result.x[1])), squeeze, omega_f,
                          omega_x)
    return best, teleport_added_noise(best)


def normal_mode_stiffness(params):
    "Eigenvalues of the stiffness matrix [[omega_opt^2, eps Omega_q], [eps Omega_q, omega_opt^2]], ascending"
    shift = params.eps_fb * params.omega_q
    stiffness = np.array([[params.omega_opt ** 2, shift], [shift, params.omega_opt ** 2]])
    return np.linalg.eigvalsh(stiffness)


def mirror_covariance(common, differential):
    """
    4x4 covariance in the order (x_A, p_A, x_B, p_B) of two mirrors whose common and differential modes,
    (A +- B)/sqrt2, are in independent Gaussian states.
    """
    v_c, v_d = common.covariance, differential.covariance
    block_same = (v_c + v_d) / 2
    block_cross = (v_c - v_d) / 2
    return np.block([[block_same, block_cross], [block_cross, block_same]])


def log_negativity(covariance):
    """
    Logarithmic negativity max(0, -log(2 nu_-/hbar)) of a two-mode Gaussian state, nu_- the smallest symplectic
    eigenvalue of the partial transpose, natural log.
    """
    covariance = np.asarray(covariance, dtype=float)
    flip = np.diag([1., 1., 1., -1.])
    transposed = flip @ covariance @ flip
    omega = np.kron(np.eye(2), np.array([[0., 1.], [-1., 0.]]))
    nu = np.abs(np.linalg.eigvals(1j * omega @ transposed)).min()
    return float(max(0., -np.log(2 * nu / HBAR)))


def mirror_entanglement(mech, meas, split=STRENGTH_SPLIT):
    """
    Entanglement of two mirrors whose common mode is measured at split Omega_q and differential mode at
    Omega_q/split, both with the classical noise of meas.

    Returns: (log negativity, common ConditionalState, differential ConditionalState)
    """
    if not split > 0:
        raise DomainError("strength split must be positive, got %r" % split)
    common = conditional_covariance_with_noise(mech, meas.with_strength(meas.omega_q * split))
    differential = conditional_covariance_with_noise(mech, meas.with_strength(meas.omega_q / split))
    return log_negativity(mirror_covariance(common.state, differential.state)), common, differential


def mirror_entanglement_decay(common, differential, mech, omega_f, tau):
    """
    Log negativity of the two-mirror state after free evolution for times tau under force noise
    S_F = 2 hbar M Omega_F^2 on each mirror.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    spread = thermal_spread(mech.mass, mech.omega_m, HBAR * mech.mass * omega_f ** 2, tau)
    evolved = []
    for state in (common, differential):
        rotated = rotate_covariance(state, mech.mass, mech.omega_m, tau)
        evolved.append([np.broadcast_to(r + s, tau.shape) for r, s in zip(rotated, spread)])
    values = []
    for k in range(tau.size):
        common_k, differential_k = [GaussianState(0., 0., v[0][k], v[1][k], v[2][k]) for v in evolved]
        values.append(log_negativity(mirror_covariance(common_k, differential_k)))
    return np.array(values)


def entanglement_window(ratio, squeeze_db=10., omega_f=1.0, mass=1.0, split=STRENGTH_SPLIT):
    """
    Feasibility of verifiable two-mirror entanglement at Omega_q = sqrt(Omega_x Omega_F), Omega_x = ratio Omega_F.
    The state survives for a time of order 1/Omega_q. The verdict asks for a sub-SQL window, entangled
    conditional mirrors and sub-Heisenberg tomography.

    Returns: EntanglementWindow
    """
    if not ratio > 0:
        raise DomainError("Omega_x/Omega_F must be positive, got %r" % ratio)
    omega_x = ratio * omega_f
    omega_q = np.sqrt(omega_x * omega_f)
    mech = MechanicalParams(mass)
    meas = MeasurementParams(omega_q, omega_f=omega_f, omega_x=omega_x, squeeze=db_to_squeeze(squeeze_db))
    entanglement, common, differential = mirror_entanglement(mech, meas, split)
    tomo = tomography_error(mech, meas)
    feasible = common.sub_sql_window and entanglement > 0 and tomo.sub_heisenberg
    return EntanglementWindow(float(omega_q), float(1. / omega_q), float(entanglement), common.fom.n_eff,
                              differential.fom.n_eff, tomo.det_ratio, bool(feasible))


def strong_coupling_ratio(mech, wavelength, finesse):
    """
    r = (lambda/F)/sqrt(hbar/(M omega_m)): the cavity linewidth in length against the zero-point spread. The
    momentum form sqrt(hbar M omega_m)/(F hbar omega_0/c) equals r/(2 pi).
    """
    if not finesse > 0:
        raise DomainError("finesse must be positive, got %r" % finesse)
    if not mech.omega_m > 0:
        raise DomainError("strong coupling needs omega_m > 0")
    zero_point = np.sqrt(HBAR / (mech.mass * mech.omega_m))
    ratio = wavelength / finesse / zero_point
    momentum_ratio = np.sqrt(HBAR * mech.mass * mech.omega_m) / (finesse * HBAR * wavelength_to_omega(wavelength) / C)
    if np.isclose(ratio, 1.):
        verdict = 'marginal'
    elif ratio < 1:
        verdict = 'strong'
    else:
        verdict = 'weak'
    return StrongCoupling(float(ratio), float(momentum_ratio), verdict)
