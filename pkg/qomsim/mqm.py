"""
Observables for tests of macroscopic quantum mechanics: gravity-decoherence time scales of a uniform or
lattice-concentrated body and the Schrodinger-Newton splitting of the center-of-mass and uncertainty rotation
frequencies.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.constants import atomic_mass

from qomsim.base import DomainError
from qomsim.core import G_NEWTON

__author__ = "The QOMSIM developers"
__copyright__ = "Copyright 2026 The QOMSIM developers"
__credits__ = ["The QOMSIM developers"]
__license__ = "MIT"
__version__ = "0.1.0"
__maintainer__ = "The QOMSIM developers"
__email__ = ""
__status__ = "Development"

logger = logging.getLogger(__name__)

SILICON_DENSITY = 2.3e3
SILICON_ATOM_MASS = 28.0855 * atomic_mass
SILICON_CONCENTRATION = 8.3e3


@dataclass(frozen=True)
class MaterialParams:
    """
    Crystal of bulk density (kg/m^3) built from atoms of mass atom_mass (kg) with zero-point spread delta_x_zp (m)
    along each axis.
    """
    density: float
    atom_mass: float
    delta_x_zp: float

    def __post_init__(self):
        if not (self.density > 0 and self.atom_mass > 0 and self.delta_x_zp > 0):
            raise DomainError("density, atom mass and zero-point spread must be positive")

    @property
    def concentration(self):
        "Lambda = m/(12 sqrt(pi) rho_0 dx_zp^3)"
        return self.atom_mass / (12 * np.sqrt(np.pi) * self.density * self.delta_x_zp ** 3)

    @property
    def omega_sn(self):
        "sqrt(G Lambda rho_0)"
        return float(np.sqrt(G_NEWTON * self.concentration * self.density))

    def sn_stiffness(self, mass):
        "C = G m M/(12 sqrt(pi) dx_zp^3) of a body of total mass M"
        return G_NEWTON * self.atom_mass * mass / (12 * np.sqrt(np.pi) * self.delta_x_zp ** 3)

    @classmethod
    def from_concentration(cls, density, atom_mass, concentration):
        "Material whose zero-point spread reproduces a given Lambda"
        if not concentration > 0:
            raise DomainError("concentration factor must be positive, got %r" % concentration)
        delta_x_zp = np.cbrt(atom_mass / (12 * np.sqrt(np.pi) * density * concentration))
        return cls(density, atom_mass, float(delta_x_zp))

    @classmethod
    def silicon(cls):
        return cls.from_concentration(SILICON_DENSITY, SILICON_ATOM_MASS, SILICON_CONCENTRATION)


@dataclass(frozen=True)
class GravityDecoherence:
    cycles: float
    threshold_omega_q: float
    threshold_time: float


@dataclass(frozen=True)
class SNSplit:
    omega_sn: float
    omega_q_sn: float
    required_q: float


def gravity_decoherence_cycles(omega_q, density, concentration=1.0):
    """
    Oscillation cycles before gravity decoherence destroys a superposition at the vacuum scale of Omega_q,
    Omega_q tau = (1/Lambda)(Omega_q/sqrt(G rho_0))^2, and the time scale 1/Omega_q at which it drops to one.
    Args:
        omega_q: float, frequency of the vacuum-scale superposition (rad/s)
        density: float, bulk density rho_0 (kg/m^3)
        concentration: float, lattice concentration factor Lambda, 1 for a uniform body

    Returns: GravityDecoherence
    """
    if not (omega_q > 0 and density > 0 and concentration > 0):
        raise DomainError("Omega_q, density and concentration must be positive")
    rate = np.sqrt(G_NEWTON * concentration * density)
    return GravityDecoherence(float((omega_q / rate) ** 2), float(rate), float(1. / rate))


def sn_frequency_split(omega_c, material=None, omega_sn=None):
    """
    The uncertainty ellipse rotates at omega_q = sqrt(omega_c^2 + omega_SN^2) while the means rotate at omega_c.
    Resolving the two peaks needs Q >~ omega_c^2/omega_SN^2.
    Args:
        omega_c: float, trap frequency (rad/s)
        material: MaterialParams, gives omega_SN = sqrt(G Lambda rho_0)
        omega_sn: float, used instead of material when given; 0 switches the split off

    Returns: SNSplit
    """
    if not omega_c > 0:
        raise DomainError("trap frequency must be positive, got %r" % omega_c)
    if omega_sn is None:
        if material is None:
            raise DomainError("give a material or omega_sn")
        omega_sn = material.omega_sn
    if omega_sn < 0:
        raise DomainError("omega_sn must be nonnegative, got %r" % omega_sn)
    required_q = np.inf if omega_sn == 0 else omega_c ** 2 / omega_sn ** 2
    return SNSplit(float(omega_sn), float(np.sqrt(omega_c ** 2 + omega_sn ** 2)), float(required_q))


def sn_coupling_scale(mass, separation, material):
    """
    Two bodies of mass M at distance L couple through C_12/M ~ G M/L^3.

    Returns: (C_12/M in 1/s^2, its ratio to the self term omega_SN^2)
    """
    if not (mass > 0 and separation > 0):
        raise DomainError("mass and separation must be positive")
    scale = G_NEWTON * mass / separation ** 3
    return float(scale), float(scale / material.omega_sn ** 2)
