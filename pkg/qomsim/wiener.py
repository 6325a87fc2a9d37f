"""
Causal Wiener filtering of a position record by spectral factorization of rational spectra.

Time dependence is e^{-i Omega t}: causal, stable transfer functions have their poles in the lower half
Omega-plane. Polynomials are numpy coefficient arrays, highest power first.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy.integrate import quad

from qomsim.base import DomainError, NumericalError
from qomsim.core import GaussianState

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-7
QUADRATURES = ('x', 'p')


def _trim(coefficients, tol=0.0):
    "Drop vanishing leading coefficients"
    coefficients = np.atleast_1d(np.asarray(coefficients, dtype=complex))
    scale = np.max(np.abs(coefficients)) if coefficients.size else 0.
    if scale == 0:
        return np.zeros(1, dtype=complex)
    nonzero = np.nonzero(np.abs(coefficients) > tol * scale)[0]
    return coefficients[nonzero[0]:]


def _conj_poly(coefficients):
    "Coefficients of conj(P(conj(Omega)))"
    return np.conj(np.asarray(coefficients, dtype=complex))


def _split_roots(roots, name):
    """
    Split roots of a real even polynomial into the lower and upper half planes. Real roots need even multiplicity
    and are shared evenly.
    """
    lower, upper, real = [], [], []
    for r in roots:
        if abs(r.imag) <= ROOT_TOL * max(1., abs(r)):
            real.append(r.real)
        elif r.imag < 0:
            lower.append(r)
        else:
            upper.append(r)
    real = sorted(real)
    shared = []
    i = 0
    while i < len(real):
        j = i
        while j + 1 < len(real) and abs(real[j + 1] - real[i]) <= np.sqrt(ROOT_TOL) * max(1., abs(real[i])):
            j += 1
        multiplicity = j - i + 1
        if multiplicity % 2:
            raise NumericalError("%s has a real root at %g of odd multiplicity %d: the spectrum changes sign"
                                 % (name, real[i], multiplicity))
        shared.extend([np.mean(real[i:j + 1])] * (multiplicity // 2))
        i = j + 1
    if len(lower) != len(upper):
        raise NumericalError("%s is not an even polynomial: unbalanced half-plane roots" % name)
    return np.array(lower + shared, dtype=complex)


@dataclass(frozen=True)
class SpectralFactor:
    """
    gain * prod(sign i (Omega - z)) / prod(sign i (Omega - p)); sign = -1 for phi_+ and +1 for phi_-.
    """
    gain: float
    zeros: np.ndarray
    poles: np.ndarray
    sign: int

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=complex)
        unit = self.sign * 1j
        value = self.gain * np.ones_like(omega)
        for z in self.zeros:
            value = value * unit * (omega - z)
        for p in self.poles:
            value = value / (unit * (omega - p))
        return value

    def polynomials(self):
        "(numerator, denominator) coefficient arrays"
        unit = self.sign * 1j
        numerator = self.gain * unit ** len(self.zeros) * np.poly(self.zeros) if len(self.zeros) else \
            np.array([self.gain], dtype=complex)
        denominator = unit ** len(self.poles) * np.poly(self.poles) if len(self.poles) else np.ones(1, dtype=complex)
        return np.asarray(numerator, dtype=complex), np.asarray(denominator, dtype=complex)


def spectral_factorize(numerator, denominator):
    """
    Factorize a rational spectrum S(Omega) = num/den, both real even polynomials positive on the real axis, as
    S = phi_+ phi_- with phi_+ free of zeros and poles in the upper half plane and phi_-(Omega) =
    conj(phi_+(conj Omega)).
    Args:
        numerator: coefficients of num, highest power first
        denominator: coefficients of den, highest power first

    Returns: (phi_plus, phi_minus) as SpectralFactor
    """
    numerator = _trim(numerator)
    denominator = _trim(denominator)
    if np.any(np.abs(numerator.imag) > 1e-12 * np.max(np.abs(numerator))) or \
            np.any(np.abs(denominator.imag) > 1e-12 * np.max(np.abs(denominator))):
        raise DomainError("spectrum polynomials must have real coefficients")
    numerator, denominator = numerator.real, denominator.real
    gain_sq = numerator[0] / denominator[0]
    if gain_sq <= 0:
        raise DomainError("spectrum is negative at large |Omega|")

    num_roots = np.roots(numerator) if numerator.size > 1 else np.array([], dtype=complex)
    den_roots = np.roots(denominator) if denominator.size > 1 else np.array([], dtype=complex)
    scale = max([1.] + [abs(r) for r in np.concatenate((num_roots, den_roots))])
    grid = np.concatenate(([0.], np.logspace(-3, 3, 121) * scale))
    with np.errstate(divide='ignore', invalid='ignore'):
        values = np.polyval(numerator, grid) / np.polyval(denominator, grid)
    finite = values[np.isfinite(values)]
    if np.any(finite < -1e-12 * np.max(np.abs(finite))):
        raise DomainError("spectrum takes negative values on the real axis")

    zeros = _split_roots(num_roots, "numerator")
    poles = _split_roots(den_roots, "denominator")
    gain = float(np.sqrt(gain_sq))
    return SpectralFactor(gain, zeros, poles, -1), SpectralFactor(gain, np.conj(zeros), np.conj(poles), 1)


def bezout_split(numerator, causal_den, anticausal_den):
    """
    Partial-fraction split num/(C A) = P/C + Q/A with deg P < deg C and deg Q < deg A, solved as a Sylvester
    system. P/C is the causal part when C has its roots in the lower half plane and A in the upper one.

    Returns: (P, Q) coefficient arrays
    """
    numerator = _trim(numerator)
    causal_den = _trim(causal_den)
    anticausal_den = _trim(anticausal_den)
    nc, na = causal_den.size - 1, anticausal_den.size - 1
    size = nc + na
    if numerator.size > size:
        raise DomainError("numerator degree %d too high for a strictly proper split of degree %d"
                          % (numerator.size - 1, size))
    matrix = np.zeros((size, size), dtype=complex)
    ## column k multiplies the coefficient of Omega^k in P (first nc columns) or Q (last na columns)
    for k in range(nc):
        column = np.polymul(anticausal_den, np.r_[1., np.zeros(k)])
        matrix[size - column.size:, nc - 1 - k] = column
    for k in range(na):
        column = np.polymul(causal_den, np.r_[1., np.zeros(k)])
        matrix[size - column.size:, size - 1 - k] = column
    rhs = np.zeros(size, dtype=complex)
    rhs[size - numerator.size:] = numerator
    try:
        solution = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError:
        raise NumericalError("causal and anticausal denominators share a root")
    return solution[:nc], solution[nc:]


def _to_laplace(coefficients):
    "Substitute Omega = i s; real coefficients are expected for a real kernel"
    coefficients = np.asarray(coefficients, dtype=complex)
    degree = coefficients.size - 1
    converted = coefficients * (1j ** np.arange(degree, -1, -1))
    if np.any(np.abs(converted.imag) > 1e-9 * max(np.max(np.abs(converted)), 1e-300)):
        raise NumericalError("transfer function does not describe a real kernel")
    return converted.real


def impulse_response(numerator, denominator, tau):
    """
    Causal kernel g(tau) whose transform int g(t) e^{i Omega t} dt is num/den (strictly proper).
    Args:
        tau: uniformly spaced times starting at 0

    Returns: np.ndarray
    """
    numerator = _trim(numerator)
    denominator = _trim(denominator)
    if numerator.size >= denominator.size:
        raise DomainError("impulse response needs a strictly proper transfer function")
    if np.allclose(numerator, 0):
        return np.zeros_like(np.asarray(tau, dtype=float))
    b, a = _to_laplace(numerator), _to_laplace(denominator)
    _, response = signal.impulse((b, a), T=np.asarray(tau, dtype=float))
    return np.asarray(response)


def _initial_value(numerator, denominator):
    "g(0+) = -i lead(num)/lead(den) for a relative degree of one, 0 above"
    numerator = _trim(numerator)
    denominator = _trim(denominator)
    if denominator.size - numerator.size > 1:
        return 0.0
    return float(np.real(-1j * numerator[0] / denominator[0]))


class WienerFilter:
    """
    Causal Wiener filter for x and p of an oscillator read out as z = x + Z with white sensing noise S_ZZ, white
    force noise S_FF and a real cross spectrum S_ZF.

    With D = M (omega_m^2 - 2 i gamma_m Omega - Omega^2) and
    N = S_ZZ D conj(D) + S_ZF (D + conj(D)) + S_FF = N_+ conj(N_+), the filter of quadrature theta = T_theta x
    (T_x = 1, T_p = -i M Omega) is P_theta/N_+, where T_theta (S_FF + S_ZF conj(D)) = P_theta conj(N_+) + Q_theta D.
    Polynomials are kept in units where M = 1, the frequency scale is
    Omega_s = max((S_FF/S_ZZ M^2)^{1/4}, omega_m, gamma_m) and the length scale sqrt(S_ZZ Omega_s).
    """

    def __init__(self, mech, s_zz, s_ff, s_zf=0.0):
        if not (s_zz > 0 and np.isfinite(s_zz)):
            raise DomainError("S_ZZ must be positive and finite, got %r" % s_zz)
        if s_ff < 0:
            raise DomainError("S_FF must be nonnegative, got %r" % s_ff)
        if s_zz * s_ff < s_zf ** 2:
            raise DomainError("S_ZZ S_FF - S_ZF^2 = %g < 0: the readout spectrum is not positive"
                              % (s_zz * s_ff - s_zf ** 2))
        m = mech.mass
        self._mech = mech
        self._scale = max((s_ff / (s_zz * m ** 2)) ** 0.25, mech.omega_m, mech.gamma_m)
        if self._scale == 0:
            self._scale = 1.0
        self._length = np.sqrt(s_zz * self._scale)
        ## normalized S_ZZ is 1
        self._s_ff = s_ff / (m ** 2 * s_zz * self._scale ** 4)
        self._s_zf = s_zf / (m * s_zz * self._scale ** 2)
        w, g = mech.omega_m / self._scale, mech.gamma_m / self._scale
        self._d = np.array([-1., -2j * g, w ** 2])
        d_sq = np.real(np.polymul(self._d, _conj_poly(self._d)))
        d_bar = _conj_poly(self._d)
        self._n = np.polyadd(np.polyadd(d_sq, np.real(self._s_zf * np.polyadd(self._d, d_bar))), [self._s_ff])

        if self._s_ff == 0:
            ## noiseless dynamics: the estimate is exact and the filter vanishes
            logger.warning("no force noise: the Wiener filter is identically zero")
            self._phi_plus, self._phi_minus = spectral_factorize([1.], [1.])
            self._n_plus = self._d.copy()
            self._p = {q: np.zeros(1, dtype=complex) for q in QUADRATURES}
            self._q_hat = {q: np.zeros(1, dtype=complex) for q in QUADRATURES}
            return

        self._phi_plus, self._phi_minus = spectral_factorize(self._n, d_sq)
        self._n_plus = np.poly(self._phi_plus.zeros)
        n_plus_bar = _conj_poly(self._n_plus)
        force_part = np.polyadd([self._s_ff], self._s_zf * d_bar)
        self._p = {}
        self._q_hat = {}
        for quadrature in QUADRATURES:
            transfer = self._transfer_polynomial(quadrature)
            p, _ = bezout_split(np.polymul(transfer, force_part), self._d, n_plus_bar)
            error_poly = np.polysub(np.polymul(transfer, self._n_plus), p)
            quotient, remainder = np.polydiv(error_poly, self._d)
            if np.max(np.abs(remainder)) > 1e-8 * np.max(np.abs(error_poly)):
                raise NumericalError("estimation error polynomial is not divisible by the dynamics")
            self._p[quadrature] = _trim(p)
            self._q_hat[quadrature] = _trim(quotient)

    @staticmethod
    def _transfer_polynomial(quadrature):
        if quadrature == 'x':
            return np.array([1.], dtype=complex)
        if quadrature == 'p':
            return np.array([-1j, 0.], dtype=complex)
        raise DomainError("quadrature must be 'x' or 'p', got '%s'" % quadrature)

    def _unit(self, quadrature):
        "SI unit of the quadrature over the length scale"
        return 1.0 if quadrature == 'x' else self._mech.mass * self._scale

    @property
    def frequency_scale(self):
        return self._scale

    @property
    def phi_plus(self):
        "Whitening factor of S_z/S_ZZ as a function of Omega/Omega_s"
        return self._phi_plus

    @property
    def phi_minus(self):
        return self._phi_minus

    def numerator(self, quadrature):
        "Normalized P_theta"
        return self._p[quadrature].copy()

    def transfer(self, quadrature, omega):
        "Filter transfer function P_theta/N_+ from z to the estimate"
        omega = np.asarray(omega, dtype=complex) / self._scale
        self._transfer_polynomial(quadrature)
        return self._unit(quadrature) * np.polyval(self._p[quadrature], omega) / np.polyval(self._n_plus, omega)

    def default_tau(self, n_points=4096, floor=1e-6):
        "Uniform grid (s) long enough for the kernels to decay below `floor` of their peak"
        decay = np.min(-np.imag(np.roots(self._n_plus)))
        if not decay > 0:
            raise NumericalError("filter poles on the real axis: the kernels do not decay")
        return np.linspace(0., np.log(1. / floor) / decay * 1.5, n_points) / self._scale

    def kernel(self, quadrature, tau=None):
        """
        Kernel g_theta(tau) of the estimate theta(t) = int_0^inf g_theta(tau) z(t - tau) dtau.
        Args:
            quadrature: str, 'x' or 'p'
            tau: uniform grid of delays (s) starting at 0; default_tau() if None

        Returns: np.ndarray
        """
        self._transfer_polynomial(quadrature)
        tau = self.default_tau() if tau is None else np.asarray(tau, dtype=float)
        response = impulse_response(self._p[quadrature], self._n_plus, tau * self._scale)
        return self._scale * self._unit(quadrature) * response

    def innovation_kernel(self, quadrature, tau):
        """
        Response of the estimate to the innovation Wiener increments, (P_theta/D)/sqrt2. These satisfy
        g_p = M dg_x/dtau.
        """
        self._transfer_polynomial(quadrature)
        response = impulse_response(self._p[quadrature] / np.sqrt(2), self._d, np.asarray(tau) * self._scale)
        return self._length * np.sqrt(self._scale) * self._unit(quadrature) * response

    def innovation_gain(self, quadrature):
        "Value at tau = 0 of the innovation kernel"
        self._transfer_polynomial(quadrature)
        return self._length * np.sqrt(self._scale) * self._unit(quadrature) * \
            _initial_value(self._p[quadrature] / np.sqrt(2), self._d)

    def covariance(self):
        """
        Conditional covariance from residues of R_theta,phi/N with
        R = S_FF Q_theta conj(Q_phi) + S_ZZ P_theta conj(P_phi) - S_ZF (Q_theta conj(P_phi) + P_theta conj(Q_phi)),
        summed over the upper half-plane roots of N.
        """
        if self._s_ff == 0:
            return GaussianState(0., 0., 0., 0., 0.)
        roots = np.roots(_conj_poly(self._n_plus))
        derivative = np.polyder(self._n)

        def element(a, b):
            r = np.polyadd(np.polymul([self._s_ff], np.polymul(self._q_hat[a], _conj_poly(self._q_hat[b]))),
                           np.polymul(self._p[a], _conj_poly(self._p[b])))
            cross = np.polyadd(np.polymul(self._q_hat[a], _conj_poly(self._p[b])),
                               np.polymul(self._p[a], _conj_poly(self._q_hat[b])))
            r = np.polysub(r, np.polymul([self._s_zf], cross))
            total = np.sum(np.polyval(r, roots) / np.polyval(derivative, roots))
            return float(np.real(0.5j * total)) * self._length ** 2 * self._unit(a) * self._unit(b)

        return GaussianState(0., 0., element('x', 'x'), element('x', 'p'), element('p', 'p'))

    def covariance_quad(self, limit=400):
        """
        Conditional covariance from the frequency integral
        V = int_0^inf Re[T_a conj(T_b) S_FF - P_a conj(P_b)] / |D|^2 dOmega/2pi by adaptive quadrature.
        """
        if not self._mech.gamma_m > 0:
            raise DomainError("the frequency-integral route needs gamma_m > 0")
        w = self._mech.omega_m / self._scale

        def element(a, b):
            t_a, t_b = self._transfer_polynomial(a), self._transfer_polynomial(b)

            def integrand(omega):
                value = self._s_ff * np.polyval(t_a, omega) * np.conj(np.polyval(t_b, omega)) \
                    - np.polyval(self._p[a], omega) * np.conj(np.polyval(self._p[b], omega))
                return float(np.real(value)) / abs(np.polyval(self._d, omega)) ** 2

            if w > 0:
                head, _ = quad(integrand, 0., 2 * w, points=[w], limit=limit)
                tail, _ = quad(integrand, 2 * w, np.inf, limit=limit)
                total = head + tail
            else:
                total, _ = quad(integrand, 0., np.inf, limit=limit)
            return total / (2 * np.pi) * self._length ** 2 * self._unit(a) * self._unit(b)

        return GaussianState(0., 0., element('x', 'x'), element('x', 'p'), element('p', 'p'))

    def estimate(self, z, dt, quadrature='x'):
        """
        Offline causal filtering of a sampled record z (samples of x + Z at step dt); estimate[k] uses
        z[0], ..., z[k-1].
        """
        z = np.asarray(z, dtype=float)
        tau = np.arange(z.size) * dt
        g = self.kernel(quadrature, tau)
        filtered = signal.fftconvolve(z, g)[:z.size] * dt
        return np.concatenate(([0.], filtered[:-1]))


def wiener_filter(mech, s_zz, s_ff, s_zf=0.0):
    return WienerFilter(mech, s_zz, s_ff, s_zf)


def wiener_covariance(mech, s_zz, s_ff, s_zf=0.0):
    "Conditional covariance of the causal Wiener estimate"
    return WienerFilter(mech, s_zz, s_ff, s_zf).covariance()


def wiener_covariance_quad(mech, s_zz, s_ff, s_zf=0.0):
    "Conditional covariance by direct frequency integration, for gamma_m > 0"
    return WienerFilter(mech, s_zz, s_ff, s_zf).covariance_quad()
