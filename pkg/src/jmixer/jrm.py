"""Flux-dependent physics of the shunted Josephson ring modulator (JRM).

All quantities are SI. Flux enters as the dimensionless reduced flux
``phi_e = Phi_e / phi0`` (so one flux quantum is ``phi_e = 2*pi``); a
``FluxBias`` wraps it with a units-of-Phi0 accessor. Functions broadcast over
numpy arrays of ``phi_e``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import PHI0_REDUCED
from .errors import DomainError, SingularFluxError

#: |cos(phi_J)| below this is treated as the L_J divergence.
SINGULAR_COS_TOL = 1e-9


@dataclass(frozen=True)
class JRMParams:
    """Critical current and the three linear inductances of the ring.

    Parameters
    ----------
    I0 : float
        Junction critical current (A).
    L_s : float
        Stray inductance in series with each junction (H).
    L_in : float
        Inner shunt inductance (H).
    L_out : float
        Outer series inductance to the mode capacitors (H).
    """

    I0: float
    L_s: float
    L_in: float
    L_out: float

    def __post_init__(self):
        for name in ("I0", "L_s", "L_in", "L_out"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise DomainError(f"JRMParams.{name} must be positive, got {value!r}")

    @property
    def L_J0(self) -> float:
        return PHI0_REDUCED / self.I0

    @property
    def alpha_J(self) -> float:
        return self.L_s / self.L_J0

    @property
    def beta(self) -> float:
        return self.L_J0 / self.L_in

    @property
    def E_J(self) -> float:
        return PHI0_REDUCED * self.I0

    @property
    def E_L(self) -> float:
        return PHI0_REDUCED**2 / self.L_in

    def replace(self, **changes) -> "JRMParams":
        values = dict(I0=self.I0, L_s=self.L_s, L_in=self.L_in, L_out=self.L_out)
        values.update(changes)
        return JRMParams(**values)


@dataclass(frozen=True)
class FluxBias:
    """External flux through the ring as reduced flux ``phi_e`` (radians)."""

    phi_e: float

    @classmethod
    def from_phi0(cls, flux_phi0: float) -> "FluxBias":
        return cls(2.0 * np.pi * flux_phi0)

    @property
    def in_phi0(self) -> float:
        return self.phi_e / (2.0 * np.pi)


@dataclass(frozen=True)
class ModeAmplitudes:
    phi_a: float = 0.0
    phi_b: float = 0.0
    phi_c: float = 0.0


def as_phi_e(flux):
    """Accept a ``FluxBias``, a float or an array of reduced fluxes."""
    if isinstance(flux, FluxBias):
        return flux.phi_e
    return flux


def junction_phase(jrm: JRMParams, flux):
    """Second-order expansion of the junction phase in ``alpha_J = L_s/L_J0``."""
    phi_e = as_phi_e(flux)
    a = jrm.alpha_J
    q = np.asarray(phi_e) / 4.0
    out = q - a * np.sin(q) + 0.5 * a**2 * np.sin(2.0 * q)
    return out if np.ndim(out) else float(out)


def circulating_current(jrm: JRMParams, flux):
    """Current circulating in the outer loop, ``I0 sin(phi_J)``."""
    return jrm.I0 * np.sin(junction_phase(jrm, flux))


def junction_inductance(jrm: JRMParams, flux, tol: float = SINGULAR_COS_TOL):
    """``L_J0 / cos(phi_J)``; negative past ``phi_J = pi/2`` and returned as-is.

    Raises
    ------
    SingularFluxError
        If ``|cos(phi_J)| < tol`` anywhere.
    """
    c = np.cos(junction_phase(jrm, flux))
    if np.any(np.abs(c) < tol):
        raise SingularFluxError(
            f"junction inductance diverges (|cos(phi_J)| < {tol:g}) at this flux"
        )
    return jrm.L_J0 / c


def jrm_inductance(jrm: JRMParams, flux, tol: float = SINGULAR_COS_TOL):
    """Ring inductance ``(L_J + L_s) || 2 L_in``."""
    branch = junction_inductance(jrm, flux, tol) + jrm.L_s
    denom = branch + 2.0 * jrm.L_in
    if np.any(np.abs(denom) < tol * jrm.L_in):
        raise SingularFluxError("JRM inductance diverges (L_J + L_s + 2 L_in = 0)")
    return 2.0 * jrm.L_in * branch / denom


def participation_ratio(jrm: JRMParams, flux):
    """Fraction of the resonant-mode inductance carried by the ring."""
    L = jrm_inductance(jrm, flux)
    return L / (L + 2.0 * jrm.L_out)


def mutual_modulation(jrm: JRMParams, flux, pump_current: float, half_ring: bool = False):
    """Modulation amplitude dM of the pumped mutual inductance between modes a and b.

    ``dM = (1/2) L_J I_phi |I_p| / I0**2``. With ``half_ring`` the junction
    inductance is halved, as used by the virtual-ground half circuit of the
    coupled-mode designs. The sign follows ``L_J I_phi`` and only sets a phase.
    """
    if np.any(np.asarray(pump_current) < 0):
        raise DomainError("pump current amplitude must be >= 0")
    L_J = junction_inductance(jrm, flux)
    if half_ring:
        L_J = L_J / 2.0
    I_phi = circulating_current(jrm, flux)
    return 0.5 * L_J * I_phi / jrm.I0**2 * np.asarray(pump_current)


def coupling_strength_g(jrm: JRMParams, flux):
    """Dimensionless unpumped three-mode coupling ``sin(phi_e/4) / (2 beta)``."""
    return np.sin(np.asarray(as_phi_e(flux)) / 4.0) / (2.0 * jrm.beta)


def jrm_energy(E_J: float, E_L: float, modes: ModeAmplitudes, flux) -> float:
    """Full trigonometric ring energy as a function of the three normal-mode fluxes."""
    pe = as_phi_e(flux)
    ha, hb, hc = modes.phi_a / 2.0, modes.phi_b / 2.0, modes.phi_c / 2.0
    cos_part = np.cos(ha) * np.cos(hb) * np.cos(hc) * np.cos(pe / 4.0)
    sin_part = np.sin(ha) * np.sin(hb) * np.sin(hc) * np.sin(pe / 4.0)
    quad = 0.25 * E_L * (modes.phi_a**2 + modes.phi_b**2 + 0.5 * modes.phi_c**2)
    return -4.0 * E_J * cos_part - 4.0 * E_J * sin_part + quad


@dataclass(frozen=True)
class EnergyExpansion:
    """Low-order coefficients of the ring energy about the ground state."""

    constant: float
    trilinear: float  # coefficient of phi_a phi_b phi_c
    quadratic_ab: float  # coefficient of (phi_a^2 + phi_b^2)
    quadratic_c: float  # coefficient of phi_c^2


def jrm_energy_expansion(E_J: float, E_L: float, flux) -> EnergyExpansion:
    pe = as_phi_e(flux)
    c4, s4 = np.cos(pe / 4.0), np.sin(pe / 4.0)
    return EnergyExpansion(
        constant=-4.0 * E_J * c4,
        trilinear=-0.5 * E_J * s4,
        quadratic_ab=E_L / 4.0 + 0.5 * E_J * c4,
        quadratic_c=E_L / 8.0 + 0.5 * E_J * c4,
    )
