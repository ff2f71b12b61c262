"""ABCD transfer-matrix algebra for lumped two-ports.

Matrices are plain complex numpy arrays of shape ``(..., 2, 2)`` laid out as
``[[A, B], [C, D]]``; the leading axes usually index frequency. Every element
constructor broadcasts over its frequency argument.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DomainError, SingularNetworkError

AMPLIFICATION = "amplification"
CONVERSION = "conversion"
MODES = (AMPLIFICATION, CONVERSION)

#: |A + B/Z0 + C Z0 + D| relative to the sum of magnitudes below this is singular.
SINGULAR_DENOM_RTOL = 1e-12


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def abcd(A, B, C, D) -> np.ndarray:
    """Stack four broadcastable arrays into an ``(..., 2, 2)`` ABCD array."""
    A, B, C, D = np.broadcast_arrays(*(np.asarray(x, dtype=complex) for x in (A, B, C, D)))
    return np.stack([np.stack([A, B], -1), np.stack([C, D], -1)], -2)


def identity(shape=()) -> np.ndarray:
    return abcd(np.ones(shape), np.zeros(shape), np.zeros(shape), np.ones(shape))


def _positive(name, value):
    if np.any(np.asarray(value) <= 0) or not np.all(np.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite")


def series_impedance(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    return abcd(1.0, Z, 0.0, 1.0)


def shunt_admittance(Y) -> np.ndarray:
    Y = np.asarray(Y, dtype=complex)
    return abcd(1.0, 0.0, Y, 1.0)


def abcd_series_capacitor(C: float, f, conjugate: bool = False) -> np.ndarray:
    """Series capacitor, ``B = 1/(j w C)``.

    ``conjugate`` evaluates the element at ``-f`` (phase-conjugated idler arm).
    """
    _positive("C", C)
    _positive("f", f)
    Z = 1.0 / (1j * 2 * np.pi * np.asarray(f, dtype=float) * C)
    return series_impedance(np.conj(Z) if conjugate else Z)


def lc_admittance(L: float, C: float, f):
    w = 2 * np.pi * np.asarray(f, dtype=float)
    return 1j * w * C + 1.0 / (1j * w * L)


def abcd_parallel_lc(L: float, C: float, f, conjugate: bool = False) -> np.ndarray:
    """Shunt parallel LC, ``C-entry = j w C + 1/(j w L)``."""
    _positive("L", L)
    _positive("C", C)
    _positive("f", f)
    Y = lc_admittance(L, C, f)
    return shunt_admittance(np.conj(Y) if conjugate else Y)


@dataclass(frozen=True)
class InverterStrength:
    """Pumped-mutual inverter admittances at the two mixing frequencies.

    ``J1`` and ``J2`` are the admittance magnitudes ``sqrt(alpha) / (w_i
    sqrt(L'_a L'_b))`` at the signal (``w_1``) and idler (``w_2``)
    frequencies; ``pump_phase`` is the phase of the mutual modulation.
    """

    J1: np.ndarray
    J2: np.ndarray
    pump_phase: float = 0.0

    @property
    def J_bar(self):
        """Geometric-mean strength ``sqrt(J1 J2)``."""
        return np.sqrt(np.asarray(self.J1) * np.asarray(self.J2))


def abcd_jrm_inverter(strength: InverterStrength, mode: str) -> np.ndarray:
    """ABCD matrix of the pumped ring seen as a frequency-converting inverter.

    With ``j1 = J1 exp(j phi_p)`` and ``j2 = J2 exp(j phi_p)``:

    conversion (``w2 = w1 + wp``)::

        [[0, j / j1], [j conj(j2), 0]]

    amplification (``w2 = wp - w1``; port-2 variables are the conjugated idler
    voltage and current)::

        [[0, j / conj(j1)], [-j j2, 0]]

    Both equal ``sqrt(w1/w2)`` times a standard inverter of strength
    ``J_bar = sqrt(J1 J2)``, so ``|det| = w1/w2``; that factor is the
    Manley-Rowe power ratio between the ports. A conversion-mode
    ``S21`` picks up ``+phi_p``, an amplification-mode ``S21`` ``-phi_p``.
    """
    check_mode(mode)
    J1 = np.asarray(strength.J1, dtype=float)
    J2 = np.asarray(strength.J2, dtype=float)
    if np.any(J1 <= 0) or np.any(J2 <= 0):
        raise DomainError("inverter strength must be > 0; use a pump-off bypass instead")
    ph = np.exp(1j * strength.pump_phase)
    j1, j2 = J1 * ph, J2 * ph
    zero = np.zeros(np.broadcast(J1, J2).shape)
    if mode == CONVERSION:
        return abcd(zero, 1j / j1, 1j * np.conj(j2), zero)
    return abcd(zero, 1j / np.conj(j1), -1j * j2, zero)


def cascade(elements: Sequence[np.ndarray]) -> np.ndarray:
    """Left-to-right product, port 1 to port 2."""
    if len(elements) == 0:
        raise DomainError("cascade needs at least one element")
    return reduce(np.matmul, elements)


def determinant(T: np.ndarray):
    return T[..., 0, 0] * T[..., 1, 1] - T[..., 0, 1] * T[..., 1, 0]


def inverse(T: np.ndarray) -> np.ndarray:
    det = determinant(T)
    return abcd(T[..., 1, 1] / det, -T[..., 0, 1] / det, -T[..., 1, 0] / det, T[..., 0, 0] / det)


@dataclass(frozen=True)
class ScatteringPair:
    S11: np.ndarray
    S12: np.ndarray
    S21: np.ndarray
    S22: np.ndarray
    Z0: float
    singular: np.ndarray

    def matrix(self) -> np.ndarray:
        return abcd(self.S11, self.S12, self.S21, self.S22)


def abcd_to_s(T: np.ndarray, Z0: float, on_singular: str = "raise") -> ScatteringPair:
    """Scattering parameters of an ABCD array for equal real port impedances.

    ``on_singular`` is ``"raise"`` (SingularNetworkError) or ``"flag"``, which
    fills singular points with NaN and marks them in ``singular``.
    """
    if not Z0 > 0:
        raise DomainError("Z0 must be positive")
    A, B, C, D = T[..., 0, 0], T[..., 0, 1], T[..., 1, 0], T[..., 1, 1]
    den = A + B / Z0 + C * Z0 + D
    scale = np.abs(A) + np.abs(B) / Z0 + np.abs(C) * Z0 + np.abs(D)
    singular = np.asarray(np.abs(den) <= SINGULAR_DENOM_RTOL * scale)
    if singular.any():
        if on_singular == "raise":
            raise SingularNetworkError("A + B/Z0 + C Z0 + D vanishes: network at oscillation threshold")
        den = np.where(singular, np.nan, den)
    with np.errstate(invalid="ignore"):  # flagged points are NaN by design
        S11 = (A + B / Z0 - C * Z0 - D) / den
        S12 = 2.0 * (A * D - B * C) / den
        S21 = 2.0 / den
        S22 = (-A + B / Z0 - C * Z0 + D) / den
    return ScatteringPair(S11, S12, S21, S22, Z0, singular)


def s_to_abcd(S: ScatteringPair) -> np.ndarray:
    Z0 = S.Z0
    S11, S12, S21, S22 = S.S11, S.S12, S.S21, S.S22
    two = 2.0 * S21
    A = ((1 + S11) * (1 - S22) + S12 * S21) / two
    B = Z0 * ((1 + S11) * (1 + S22) - S12 * S21) / two
    C = ((1 - S11) * (1 - S22) - S12 * S21) / (Z0 * two)
    D = ((1 - S11) * (1 + S22) + S12 * S21) / two
    return abcd(A, B, C, D)
