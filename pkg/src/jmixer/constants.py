"""Physical constants (SI) used throughout the package."""

from dataclasses import dataclass

import numpy as np
from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    reduced_planck: float = _sc.hbar
    electron_charge: float = _sc.e
    boltzmann: float = _sc.k
    light_speed: float = _sc.c

    @property
    def reduced_flux_quantum(self) -> float:
        """hbar / 2e, in Wb."""
        return self.reduced_planck / (2.0 * self.electron_charge)

    @property
    def flux_quantum(self) -> float:
        return 2.0 * np.pi * self.reduced_flux_quantum


CONSTANTS = PhysicalConstants()

PHI0_REDUCED = CONSTANTS.reduced_flux_quantum
PHI0 = CONSTANTS.flux_quantum
HBAR = CONSTANTS.reduced_planck
KB = CONSTANTS.boltzmann
C_LIGHT = CONSTANTS.light_speed
