"""Unit system and physical constants"""

import typing as t
import logging
import math
from dataclasses import dataclass
from scipy import constants as sc  # type: ignore
from .exceptions import InvalidConfig

logger = logging.getLogger(__name__)

#: Reduced Planck constant in J*s
HBAR_SI: float = sc.hbar
#: Unified atomic mass unit in kg
AMU_SI: float = sc.atomic_mass
#: Helium-3 mass of the reference runs in kg, within 0.04% of 3.016 u
HE3_MASS_SI = 5.01e-27


class Dimension(t.NamedTuple):
    """Exponents of (length, time, mass) for a physical quantity"""

    length: int = 0
    time: int = 0
    mass: int = 0


DIMENSIONLESS = Dimension()
LENGTH = Dimension(length=1)
TIME = Dimension(time=1)
MASS = Dimension(mass=1)
VELOCITY = Dimension(length=1, time=-1)
MOMENTUM = Dimension(length=1, time=-1, mass=1)
ENERGY = Dimension(length=2, time=-2, mass=1)
FORCE = Dimension(length=1, time=-2, mass=1)
ACTION = Dimension(length=2, time=-1, mass=1)
#: Interaction constant C3, energy times length cubed
C3 = Dimension(length=5, time=-2, mass=1)


@dataclass(frozen=True)
class UnitSystem:
    """
    Internal unit system, defined by how many SI units one internal unit spans.

    The default is nanometre / nanosecond / helium-3 mass, which keeps the
    Hamiltonian entries close to unity.
    """

    #: Metres per internal length unit
    length_unit: float = 1.0e-9
    #: Seconds per internal time unit
    time_unit: float = 1.0e-9
    #: Kilograms per internal mass unit
    mass_unit: float = HE3_MASS_SI

    def __post_init__(self) -> None:
        for name in ('length_unit', 'time_unit', 'mass_unit'):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                msg = f'{name} must be strictly positive and finite, got {value}'
                logger.error(msg)
                raise InvalidConfig(name, msg)

    def factor(self, dim: Dimension) -> float:
        """SI value of one internal unit of dimension ``dim``"""
        return (
            self.length_unit**dim.length
            * self.time_unit**dim.time
            * self.mass_unit**dim.mass
        )

    def to_internal(self, value: t.Any, dim: Dimension) -> t.Any:
        """Convert an SI value (scalar or array) to internal units"""
        return value / self.factor(dim)

    def to_si(self, value: t.Any, dim: Dimension) -> t.Any:
        """Convert an internal value (scalar or array) back to SI"""
        return value * self.factor(dim)

    @property
    def hbar(self) -> float:
        """
        :getter: Returns the reduced Planck constant in internal units
        :type: float
        """
        return self.to_internal(HBAR_SI, ACTION)


SI = UnitSystem(length_unit=1.0, time_unit=1.0, mass_unit=1.0)
