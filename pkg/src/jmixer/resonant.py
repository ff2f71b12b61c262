"""Resonant-mode Josephson mixers: one shunt LC per port around the pumped ring.

The pumped ring couples the two LC modes through a modulated mutual
inductance ``M(t) = dM cos(w_p t)``. Eliminating the mutual gives shunt
inductances ``L'_k = L_k (1 - alpha)`` with ``alpha = |dM|^2 / (4 L_a L_b)``
and a frequency-converting inverter between them (see
:func:`jmixer.twoport.abcd_jrm_inverter`). Mode-b elements are evaluated at
the idler frequency, conjugated in amplification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jrm as _jrm
from .errors import DomainError
from .jrm import FluxBias, JRMParams
from .sweep import SweepResult
from .twoport import (
    AMPLIFICATION,
    CONVERSION,
    InverterStrength,
    abcd_jrm_inverter,
    abcd_to_s,
    cascade,
    check_mode,
    shunt_admittance,
)


@dataclass(frozen=True)
class ResonantJMParams:
    """Ring, mode capacitors and feedline impedance.

    ``G_a`` and ``G_b`` are optional shunt conductances (S) modelling internal
    loss; the model is lossless by default.
    """

    jrm: JRMParams
    C_a: float
    C_b: float
    Z0: float = 50.0
    G_a: float = 0.0
    G_b: float = 0.0

    def __post_init__(self):
        if not (self.C_a > 0 and self.C_b > 0):
            raise DomainError("mode capacitances must be positive")
        if not self.Z0 > 0:
            raise DomainError("Z0 must be positive")
        if self.G_a < 0 or self.G_b < 0:
            raise DomainError("loss conductances must be >= 0")

    def capacitance(self, mode: str) -> float:
        return {"a": self.C_a, "b": self.C_b}[_mode_key(mode)]

    def conductance(self, mode: str) -> float:
        return {"a": self.G_a, "b": self.G_b}[_mode_key(mode)]


@dataclass(frozen=True)
class WorkingPoint:
    """Flux, pump frequency and pump strength.

    Exactly one of ``pump_current`` (A), ``alpha`` or ``rho`` sets the pump
    strength; ``rho`` is mapped to ``alpha`` with the matched on-resonance
    relation (:func:`alpha_from_rho`).
    """

    flux: FluxBias
    pump_frequency: float
    pump_current: float | None = None
    alpha: float | None = None
    rho: float | None = None
    pump_phase: float = 0.0

    def __post_init__(self):
        if not isinstance(self.flux, FluxBias):
            object.__setattr__(self, "flux", FluxBias(float(self.flux)))
        if not self.pump_frequency > 0:
            raise DomainError("pump frequency must be positive")
        given = [x for x in (self.pump_current, self.alpha, self.rho) if x is not None]
        if len(given) != 1:
            raise DomainError("give exactly one of pump_current, alpha, rho")
        if given[0] < 0:
            raise DomainError("pump strength must be >= 0")
        if self.alpha is not None and self.alpha >= 1:
            raise DomainError("alpha must be < 1 (L'_k would be nonpositive)")


def _mode_key(mode: str) -> str:
    if mode not in ("a", "b"):
        raise DomainError(f"mode must be 'a' or 'b', got {mode!r}")
    return mode


def mode_inductance(params: ResonantJMParams, flux):
    """``L_k = 2 L_out + L_JRM``; identical for both modes."""
    L = 2.0 * params.jrm.L_out + _jrm.jrm_inductance(params.jrm, flux)
    if np.any(np.asarray(L) <= 0):
        raise DomainError("mode inductance is nonpositive at this flux")
    return L


def mode_frequency(params: ResonantJMParams, flux, mode: str):
    """Unpumped resonance frequency (Hz) of mode ``a`` or ``b``."""
    C = params.capacitance(mode)
    return 1.0 / (2 * np.pi * np.sqrt(mode_inductance(params, flux) * C))


def mode_impedance(params: ResonantJMParams, flux, mode: str):
    return np.sqrt(mode_inductance(params, flux) / params.capacitance(mode))


def quality_factor(params: ResonantJMParams, flux, mode: str):
    """External quality factor ``Z0 / Z_k``."""
    return params.Z0 / mode_impedance(params, flux, mode)


def linear_bandwidth(params: ResonantJMParams, flux=None, mode: str = "a") -> float:
    """Pump-off linewidth ``gamma_k = 1 / (Z0 C_k)`` returned in Hz (``gamma_k / 2 pi``).

    Equals ``w_k Z_k / Z0``, which is flux independent for a shunt LC.
    """
    return 1.0 / (2 * np.pi * params.Z0 * params.capacitance(mode))


def effective_linewidth(gamma_a: float, gamma_b: float) -> float:
    """Harmonic-mean linewidth ``2 g_a g_b / (g_a + g_b)``."""
    return 2.0 * gamma_a * gamma_b / (gamma_a + gamma_b)


def gain_bandwidth_check(gamma_a: float, gamma_b: float, G: float) -> float:
    """Dynamical bandwidth ``B = gamma / sqrt(G)`` of a resonant amplifier."""
    if min(gamma_a, gamma_b, G) <= 0:
        raise DomainError("linewidths and gain must be positive")
    return effective_linewidth(gamma_a, gamma_b) / np.sqrt(G)


def stability_product(p: float, Q_a: float, Q_b: float) -> float:
    """The ``p^2 Q_a Q_b`` figure of merit."""
    return p**2 * Q_a * Q_b


def alpha_from_current(params: ResonantJMParams, flux, pump_current: float) -> float:
    dM = _jrm.mutual_modulation(params.jrm, flux, pump_current)
    L = mode_inductance(params, flux)
    return float(np.abs(dM) ** 2 / (4.0 * L * L))


def alpha_from_rho(params: ResonantJMParams, flux, rho: float) -> float:
    """Matched on-resonance mapping ``rho^2 = alpha Q_a Q_b / (1 - alpha)``.

    Exact when both modes sit on their pumped resonances
    ``1/sqrt(L'_k C_k)``; :func:`calibrate_rho` gives the numerical match for a
    detuned pump.
    """
    QaQb = quality_factor(params, flux, "a") * quality_factor(params, flux, "b")
    return float(rho**2 / (QaQb + rho**2))


def rho_from_alpha(params: ResonantJMParams, flux, alpha: float) -> float:
    QaQb = quality_factor(params, flux, "a") * quality_factor(params, flux, "b")
    return float(np.sqrt(alpha * QaQb / (1.0 - alpha)))


def calibrate_rho(s_aa_center: complex) -> float:
    """Pump strength ``rho`` reproducing an on-resonance reflection.

    Inverts the matched-converter relation ``S_aa = (1 - rho^2)/(1 + rho^2)``.
    The sign of the reflection is taken from its real part; a global phase
    from the network is therefore tolerated as long as it is small.
    """
    s = abs(complex(s_aa_center))
    if s > 1:
        raise DomainError("|S_aa| > 1: not a passive converter reflection")
    s = s if complex(s_aa_center).real >= 0 else -s
    if s == -1:
        return float("inf")
    return float(np.sqrt((1 - s) / (1 + s)))


def pump_alpha(params: ResonantJMParams, wp: WorkingPoint) -> float:
    if wp.alpha is not None:
        return float(wp.alpha)
    if wp.rho is not None:
        return alpha_from_rho(params, wp.flux, wp.rho)
    alpha = alpha_from_current(params, wp.flux, wp.pump_current)
    if alpha >= 1:
        raise DomainError("pump current gives alpha >= 1")
    return alpha


def idler_frequency(f_signal, pump_frequency: float, mode: str):
    check_mode(mode)
    f_signal = np.asarray(f_signal, dtype=float)
    if mode == CONVERSION:
        return f_signal + pump_frequency
    f2 = pump_frequency - f_signal
    if np.any(f2 <= 0):
        raise DomainError("amplification needs pump frequency above every signal frequency")
    return f2


def _shunt_lc(L, C, G, f, conjugate):
    w = 2 * np.pi * np.asarray(f, dtype=float)
    Y = 1j * w * C + 1.0 / (1j * w * L)
    if conjugate:
        Y = np.conj(Y)
    return shunt_admittance(Y + G)


def inverter_strength(L_a_p, L_b_p, alpha, f1, f2, pump_phase=0.0) -> InverterStrength:
    """``J'_i = sqrt(alpha) / (w_i sqrt(L'_a L'_b))`` at both mixing frequencies."""
    root = np.sqrt(alpha) / np.sqrt(L_a_p * L_b_p)
    J1 = root / (2 * np.pi * np.asarray(f1, dtype=float))
    J2 = root / (2 * np.pi * np.asarray(f2, dtype=float))
    return InverterStrength(J1, J2, pump_phase)


def build_cascade(params: ResonantJMParams, wp: WorkingPoint, f_signal, mode: str):
    """``T_a T_JRM T_b`` over the signal grid (requires ``alpha > 0``)."""
    check_mode(mode)
    alpha = pump_alpha(params, wp)
    if alpha <= 0:
        raise DomainError("alpha = 0: pump-off network has no inverter; use sparams")
    L = mode_inductance(params, wp.flux)
    Lp = L * (1.0 - alpha)
    f1 = np.asarray(f_signal, dtype=float)
    f2 = idler_frequency(f1, wp.pump_frequency, mode)
    conj_b = mode == AMPLIFICATION
    T_a = _shunt_lc(Lp, params.C_a, params.G_a, f1, False)
    T_b = _shunt_lc(Lp, params.C_b, params.G_b, f2, conj_b)
    T_j = abcd_jrm_inverter(inverter_strength(Lp, Lp, alpha, f1, f2, wp.pump_phase), mode)
    return cascade([T_a, T_j, T_b])


def unpumped_reflection(params: ResonantJMParams, flux, f, mode: str):
    """Reflection of mode ``a`` or ``b`` with the pump off, at frequencies ``f``."""
    L = mode_inductance(params, flux)
    Y = _shunt_lc(L, params.capacitance(mode), params.conductance(mode), f, False)[..., 1, 0]
    return (1 - Y * params.Z0) / (1 + Y * params.Z0)


def _pump_off(params, wp, f1, f2, mode):
    L = mode_inductance(params, wp.flux)
    Z0 = params.Z0
    Ya = _shunt_lc(L, params.C_a, params.G_a, f1, False)[..., 1, 0]
    Yb = _shunt_lc(L, params.C_b, params.G_b, f2, mode == AMPLIFICATION)[..., 1, 0]
    zero = np.zeros_like(f1, dtype=complex)
    return {
        "S_aa": (1 - Ya * Z0) / (1 + Ya * Z0),
        "S_ab": zero,
        "S_ba": zero.copy(),
        "S_bb": (1 - Yb * Z0) / (1 + Yb * Z0),
    }


def sparams(params: ResonantJMParams, wp: WorkingPoint, f_grid, mode: str) -> SweepResult:
    """Scattering parameters over a strictly increasing signal grid.

    ``S_aa`` is the signal reflection (the power gain ``|S_aa|^2`` in
    amplification), ``S_ba`` the port-a to port-b mixing product. Points at an
    oscillation threshold are NaN and flagged in ``singular``.
    """
    f1 = np.asarray(f_grid, dtype=float)
    if f1.ndim != 1 or np.any(np.diff(f1) <= 0):
        raise DomainError("frequency grid must be 1-D and strictly increasing")
    f2 = idler_frequency(f1, wp.pump_frequency, mode)
    alpha = pump_alpha(params, wp)
    meta = {
        "model": "resonant",
        "mode": mode,
        "flux_phi0": wp.flux.in_phi0,
        "pump_frequency": wp.pump_frequency,
        "alpha": alpha,
        "pump_phase": wp.pump_phase,
    }
    if alpha == 0:
        return SweepResult(f1, _pump_off(params, wp, f1, f2, mode), idler_freq=f2, meta=meta)
    S = abcd_to_s(build_cascade(params, wp, f1, mode), params.Z0, on_singular="flag")
    s = {"S_aa": S.S11, "S_ab": S.S12, "S_ba": S.S21, "S_bb": S.S22}
    return SweepResult(f1, s, idler_freq=f2, singular=S.singular, meta=meta)
