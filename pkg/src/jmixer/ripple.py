"""Standing-wave ripple from multiple reflections between a circulator and the device."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT
from .errors import DivergenceError, DomainError


def db_to_amplitude(x_db):
    """Amplitude ratio of a power ratio in dB."""
    return 10.0 ** (np.asarray(x_db, dtype=float) / 20.0)


@dataclass(frozen=True)
class RippleSetup:
    """Real, frequency-independent router and cable amplitudes.

    ``t21``/``t32`` forward circulator transmission, ``t31`` reverse leakage,
    ``tc`` one-way cable transmission, ``r22`` reflection of the circulator
    port facing the device; ``l_c`` cable length (m), ``eps`` dielectric
    constant.
    """

    t21: float
    t32: float
    t31: float
    tc: float
    r22: float
    l_c: float
    eps: float

    def __post_init__(self):
        for name in ("t21", "t32", "t31", "tc", "r22"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise DomainError(f"{name} must lie in [0, 1]")
        if self.l_c < 0:
            raise DomainError("cable length must be >= 0")
        if self.eps < 1:
            raise DomainError("permittivity must be >= 1")


#: Parameters used to illustrate the effect on a broadband converter.
TYPICAL_SETUP = RippleSetup(t21=0.95, t32=0.95, t31=0.1, tc=0.95, r22=0.17, l_c=1.1, eps=2.1)
IDEAL_SETUP = RippleSetup(t21=1.0, t32=1.0, t31=0.0, tc=1.0, r22=0.0, l_c=0.0, eps=1.0)


def cable_phase(setup: RippleSetup, f):
    return 2 * np.pi * np.asarray(f, dtype=float) * np.sqrt(setup.eps) * setup.l_c / C_LIGHT


def effective_reflection(setup: RippleSetup, s_device, f):
    """Reflection seen at the measurement ports for a device reflection ``s_device``.

    Raises
    ------
    DivergenceError
        If ``|r22 S t_c^2| >= 1`` at any point.
    """
    S = np.asarray(s_device, dtype=complex)
    loop = setup.r22 * np.abs(S) * setup.tc**2
    if np.any(loop >= 1):
        raise DivergenceError("loop gain |r22 S' tc^2| >= 1: regenerative standing wave")
    ph = np.exp(2j * cable_phase(setup, f))
    return setup.t31 + setup.t32 * setup.t21 * setup.tc**2 * ph * S / (1 - setup.r22 * S * setup.tc**2 * ph)


def normalized_response(setup: RippleSetup, s_on, s_off, f):
    """``|S_on / S_off|^2`` with both legs passed through the setup."""
    on = effective_reflection(setup, s_on, f)
    off = effective_reflection(setup, s_off, f)
    return np.abs(on / off) ** 2


def ripple_spacing(setup: RippleSetup) -> float:
    """Free spectral range of the cable round trip, ``c / (2 sqrt(eps) l_c)``."""
    if not setup.l_c > 0:
        raise DomainError("ripple spacing needs a positive cable length")
    return C_LIGHT / (2 * np.sqrt(setup.eps) * setup.l_c)


def extrema_spacing(f, y, kind: str = "max") -> float:
    """Mean spacing (Hz) of strict interior local maxima (or minima) of ``y``."""
    y = np.asarray(y, dtype=float)
    if kind == "min":
        y = -y
    elif kind != "max":
        raise DomainError("kind must be 'max' or 'min'")
    idx = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] > y[2:])) + 1
    if idx.size < 2:
        return np.nan
    return float(np.mean(np.diff(np.asarray(f, dtype=float)[idx])))
