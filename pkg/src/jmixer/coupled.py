"""Coupled-mode (impedance-matched) mixers.

Each port of the ring is matched to its feedline by a four-pole network of
shunt LC resonators joined by series coupling capacitors. The model works on
the half circuit obtained from the virtual ground of each differential mode,
where resonator 1 is ``L_k = L_out + L_JRM/2`` shunted by ``C_1k = 2 C_k``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import jrm as _jrm
from .errors import DomainError, SynthesisInfeasibleError
from .jrm import FluxBias, JRMParams
from .parallel import ordered_map
from .resonant import WorkingPoint, idler_frequency, inverter_strength
from .sweep import SweepResult
from .twoport import (
    AMPLIFICATION,
    CONVERSION,
    abcd_jrm_inverter,
    abcd_series_capacitor,
    abcd_to_s,
    cascade,
    check_mode,
    shunt_admittance,
)

#: Pump regularization used when mapping passive resonances.
MAP_ALPHA = 1e-3

ARM_FIELDS = ("L2", "L3", "L4", "C2", "C3", "C4", "C12", "C23", "C34")


@dataclass(frozen=True)
class PrototypeCoefficients:
    """Low-pass prototype coefficients ``g0..g5``."""

    g0: float
    g1: float
    g2: float
    g3: float
    g4: float
    g5: float

    def __post_init__(self):
        if any(not (g > 0 and np.isfinite(g)) for g in self.as_tuple()):
            raise DomainError("prototype coefficients must be positive")

    def as_tuple(self):
        return (self.g0, self.g1, self.g2, self.g3, self.g4, self.g5)

    def __getitem__(self, i):
        return self.as_tuple()[i]

    @classmethod
    def from_sequence(cls, g) -> "PrototypeCoefficients":
        g = list(g)
        if len(g) != 6:
            raise DomainError("need six prototype coefficients g0..g5")
        return cls(*map(float, g))


#: Four-pole Chebyshev, 1 dB ripple.
THEORY_PROTOTYPE = PrototypeCoefficients(1.0, 0.7629, 1.031, 1.1032, 0.3999, 1.1055)
#: Tuned values for the amplifier (JM3) and converter (JM4) designs.
JM3_PROTOTYPE = PrototypeCoefficients(1.0, 0.76, 1.031, 1.09, 0.34, 1.1055)
JM4_PROTOTYPE = PrototypeCoefficients(1.0, 0.78, 1.1, 0.75, 0.45, 0.93)


@dataclass(frozen=True)
class SynthesisSpec:
    """Inputs of the matching-network synthesis.

    ``R_a`` and ``R_b`` are the magnitudes of the effective negative
    resistance of the pumped ring seen by each mode; ``Z2_a``/``Z2_b`` are
    the free impedance of resonator 2. ``mode`` is ``"amplifier"`` or
    ``"converter"``.
    """

    jrm: JRMParams
    C_a: float
    C_b: float
    R_a: float = 15.0
    R_b: float = 30.0
    Z2_a: float = 50.0
    Z2_b: float = 50.0
    Z0: float = 50.0
    design_flux: FluxBias = field(default_factory=lambda: FluxBias.from_phi0(0.6))
    mode: str = "amplifier"

    def __post_init__(self):
        for name in ("C_a", "C_b", "R_a", "R_b", "Z2_a", "Z2_b", "Z0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"SynthesisSpec.{name} must be positive, got {value!r}")
        if self.mode not in ("amplifier", "converter"):
            raise DomainError("mode must be 'amplifier' or 'converter'")
        if not isinstance(self.design_flux, FluxBias):
            object.__setattr__(self, "design_flux", FluxBias(float(self.design_flux)))


@dataclass(frozen=True)
class ModeArm:
    """Resonators 2..4 and the three coupling capacitors of one mode."""

    L2: float
    L3: float
    L4: float
    C2: float
    C3: float
    C4: float
    C12: float
    C23: float
    C34: float

    def __post_init__(self):
        for name in ARM_FIELDS:
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"ModeArm.{name} must be positive, got {value!r}")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Netlist:
    """Half-circuit element values of a coupled-mode mixer.

    Resonator 1 of mode k is formed by the ring (``L_out + L_JRM/2``, flux
    dependent) and ``2 C_k``; it is not stored separately.
    """

    jrm: JRMParams
    C_a: float
    C_b: float
    a: ModeArm
    b: ModeArm
    Z0: float = 50.0
    provenance: str = "fitted"
    design: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (self.C_a > 0 and self.C_b > 0 and self.Z0 > 0):
            raise DomainError("C_a, C_b and Z0 must be positive")
        if self.provenance not in ("synthesized", "fitted"):
            raise DomainError("provenance must be 'synthesized' or 'fitted'")

    def arm(self, mode: str) -> ModeArm:
        return {"a": self.a, "b": self.b}[mode]

    def C1(self, mode: str) -> float:
        return 2.0 * {"a": self.C_a, "b": self.C_b}[mode]


def _jm_jrm() -> JRMParams:
    return JRMParams(I0=2.5e-6, L_s=10e-12, L_in=30e-12, L_out=9e-12)


def _arm(L, C, Cc) -> ModeArm:
    nH, pF = 1e-9, 1e-12
    return ModeArm(
        L2=L[0] * nH, L3=L[1] * nH, L4=L[2] * nH,
        C2=C[0] * pF, C3=C[1] * pF, C4=C[2] * pF,
        C12=Cc[0] * pF, C23=Cc[1] * pF, C34=Cc[2] * pF,
    )


def jm3_netlist() -> Netlist:
    """Fitted element values of the JM3 amplifier."""
    return Netlist(
        jrm=_jm_jrm(), C_a=6.276e-12, C_b=3.217e-12,
        a=_arm((1.17, 0.597, 0.302), (0.13, 0.573, 1.585), (0.215, 0.052, 0.171)),
        b=_arm((0.8, 0.333, 0.132), (0.177, 0.575, 1.751), (0.101, 0.03, 0.124)),
    )


def jm4_netlist() -> Netlist:
    """Fitted element values of the JM4 converter."""
    return Netlist(
        jrm=_jm_jrm(), C_a=6.287e-12, C_b=3.219e-12,
        a=_arm((1.131, 0.575, 0.292), (0.12, 0.582, 1.517), (0.239, 0.073, 0.219)),
        b=_arm((0.804, 0.343, 0.146), (0.171, 0.561, 1.616), (0.106, 0.04, 0.142)),
    )


def half_circuit_inductance(jrm: JRMParams, flux):
    """``L_out + L_JRM/2``."""
    L = jrm.L_out + 0.5 * _jrm.jrm_inductance(jrm, flux)
    if np.any(np.asarray(L) <= 0):
        raise DomainError("half-circuit inductance is nonpositive at this flux")
    return L


def half_circuit(jrm: JRMParams, C_k: float, flux):
    """Inductance, shunt capacitance ``2 C_k`` and bare angular resonance of resonator 1."""
    L = half_circuit_inductance(jrm, flux)
    C1 = 2.0 * C_k
    return L, C1, 1.0 / np.sqrt(L * C1)


@dataclass(frozen=True)
class StageDesign:
    """Intermediate synthesis quantities of one mode (SI, angular frequency)."""

    omega: float
    L1: float
    w: float
    Z: tuple  # Z_1..Z_4
    J: tuple  # J_12, J_23, J_34
    C_bare: tuple  # C'_1..C'_4


def _stage_values(L1, omega, g, R, Z2, Z0):
    Z1 = omega * L1
    w = g[0] * g[1] * Z1 / R
    Z4 = w * Z0 / (g[4] * g[5])
    Z3 = np.sqrt(Z2 * Z4)
    Z = (Z1, Z2, Z3, Z4)
    J = tuple(w / np.sqrt(g[i] * g[i + 1] * Z[i - 1] * Z[i]) for i in (1, 2, 3))
    C_bare = tuple(1.0 / (omega * z) for z in Z)
    return StageDesign(omega, L1, w, Z, J, C_bare)


def design_mode(L1: float, C_k: float, proto: PrototypeCoefficients, R: float, Z2: float, Z0: float) -> StageDesign:
    """Stage values for one mode with ``C'_1 - C_12 = 2 C_k`` enforced.

    ``C_12`` depends on the center frequency through ``w_k`` and ``Z_1``, so
    the center is the root of ``1/(w^2 L_1) - C_12(w) - 2 C_k`` just below the
    bare resonance ``1/sqrt(2 C_k L_1)``.
    """
    g = proto.as_tuple()
    w0 = 1.0 / np.sqrt(2.0 * C_k * L1)

    def closure(omega):
        s = _stage_values(L1, omega, g, R, Z2, Z0)
        return s.C_bare[0] - s.J[0] / omega - 2.0 * C_k

    lo = w0
    while closure(lo) <= 0:
        lo *= 0.8
        if lo < 1e-3 * w0:
            raise SynthesisInfeasibleError("no center frequency closes resonator 1", stage=1)
    omega = brentq(closure, lo, w0, xtol=1e-6, rtol=1e-15, maxiter=200)
    return _stage_values(L1, omega, g, R, Z2, Z0)


def _arm_from_stage(s: StageDesign, mode: str) -> ModeArm:
    C12, C23, C34 = (j / s.omega for j in s.J)
    Cb = s.C_bare
    shunt = {2: Cb[1] - C12 - C23, 3: Cb[2] - C23 - C34, 4: Cb[3] - C34}
    for stage, value in shunt.items():
        if value <= 0:
            raise SynthesisInfeasibleError(
                f"mode {mode}: shunt capacitance C{stage} = {value:.4g} F is nonpositive "
                "after absorbing the coupling capacitors",
                mode=mode,
                stage=stage,
            )
    L2, L3, L4 = (z / s.omega for z in s.Z[1:])
    return ModeArm(L2, L3, L4, shunt[2], shunt[3], shunt[4], C12, C23, C34)


def synthesize(spec: SynthesisSpec, proto: PrototypeCoefficients) -> Netlist:
    """Element values of the matching networks for both modes.

    The last inverter (resonator 4 to feedline) is absorbed by the choice of
    ``Z_4``; no element is emitted for it.

    Raises
    ------
    SynthesisInfeasibleError
        If a shunt capacitance goes nonpositive; ``mode`` and ``stage`` name it.
    """
    L1 = half_circuit_inductance(spec.jrm, spec.design_flux)
    stages = {
        "a": design_mode(L1, spec.C_a, proto, spec.R_a, spec.Z2_a, spec.Z0),
        "b": design_mode(L1, spec.C_b, proto, spec.R_b, spec.Z2_b, spec.Z0),
    }
    arms = {k: _arm_from_stage(s, k) for k, s in stages.items()}
    design = {
        "design_flux_phi0": spec.design_flux.in_phi0,
        "mode": spec.mode,
        "prototype": list(proto.as_tuple()),
        **{f"f_{k}": s.omega / (2 * np.pi) for k, s in stages.items()},
        **{f"w_{k}": s.w for k, s in stages.items()},
    }
    return Netlist(spec.jrm, spec.C_a, spec.C_b, arms["a"], arms["b"], spec.Z0, "synthesized", design)


def design_frequencies(netlist: Netlist, flux) -> tuple[float, float]:
    """Centers (Hz) at which resonator 1 closes with its coupling capacitor."""
    L1 = half_circuit_inductance(netlist.jrm, flux)
    out = []
    for k in "ab":
        out.append(1.0 / (2 * np.pi * np.sqrt(L1 * (netlist.C1(k) + netlist.arm(k).C12))))
    return out[0], out[1]


def coupled_alpha(netlist: Netlist, wp: WorkingPoint) -> float:
    """Pump coupling ``|dM|^2 / (4 L_a L_b)`` with the half-ring modulation."""
    if wp.rho is not None:
        raise DomainError("coupled model takes pump_current or alpha, not rho")
    if wp.alpha is not None:
        return float(wp.alpha)
    L = half_circuit_inductance(netlist.jrm, wp.flux)
    dM = _jrm.mutual_modulation(netlist.jrm, wp.flux, wp.pump_current, half_ring=True)
    alpha = float(np.abs(dM) ** 2 / (4.0 * L * L))
    if alpha >= 1:
        raise DomainError("pump current gives alpha >= 1")
    return alpha


def _lc(L, C, f, conjugate):
    w = 2 * np.pi * np.asarray(f, dtype=float)
    Y = 1j * w * C + 1.0 / (1j * w * L)
    return shunt_admittance(np.conj(Y) if conjugate else Y)


def _arm_elements(arm: ModeArm, L1, C1, f, conjugate):
    """Elements from resonator 4 (feedline side) to resonator 1 (ring side)."""
    cap = lambda C: abcd_series_capacitor(C, f, conjugate)  # noqa: E731
    return [
        _lc(arm.L4, arm.C4, f, conjugate), cap(arm.C34),
        _lc(arm.L3, arm.C3, f, conjugate), cap(arm.C23),
        _lc(arm.L2, arm.C2, f, conjugate), cap(arm.C12),
        _lc(L1, C1, f, conjugate),
    ]


def coupled_cascade(netlist: Netlist, wp: WorkingPoint, f_signal, mode: str, alpha: float | None = None):
    """The 15-element product from port a to port b."""
    check_mode(mode)
    if alpha is None:
        alpha = coupled_alpha(netlist, wp)
    if not 0 < alpha < 1:
        raise DomainError("coupled cascade needs 0 < alpha < 1")
    f1 = np.asarray(f_signal, dtype=float)
    f2 = idler_frequency(f1, wp.pump_frequency, mode)
    Lp = half_circuit_inductance(netlist.jrm, wp.flux) * (1.0 - alpha)
    side_a = _arm_elements(netlist.a, Lp, netlist.C1("a"), f1, False)
    side_b = _arm_elements(netlist.b, Lp, netlist.C1("b"), f2, mode == AMPLIFICATION)[::-1]
    T_j = abcd_jrm_inverter(inverter_strength(Lp, Lp, alpha, f1, f2, wp.pump_phase), mode)
    return cascade(side_a + [T_j] + side_b)


def coupled_sparams(netlist: Netlist, wp: WorkingPoint, f_grid, mode: str) -> SweepResult:
    f1 = np.asarray(f_grid, dtype=float)
    if f1.ndim != 1 or np.any(np.diff(f1) <= 0):
        raise DomainError("frequency grid must be 1-D and strictly increasing")
    alpha = coupled_alpha(netlist, wp)
    T = coupled_cascade(netlist, wp, f1, mode, alpha)
    S = abcd_to_s(T, netlist.Z0, on_singular="flag")
    meta = {
        "model": "coupled",
        "mode": mode,
        "flux_phi0": wp.flux.in_phi0,
        "pump_frequency": wp.pump_frequency,
        "alpha": alpha,
        "pump_phase": wp.pump_phase,
    }
    s = {"S_aa": S.S11, "S_ab": S.S12, "S_ba": S.S21, "S_bb": S.S22}
    return SweepResult(f1, s, idler_freq=idler_frequency(f1, wp.pump_frequency, mode), singular=S.singular, meta=meta)


# --- passive resonances -------------------------------------------------------


def _ladder_matrices(arm: ModeArm, L1, C1):
    """Capacitance matrix and inductances of the open-port ladder, resonator 1 first."""
    Cc = (arm.C12, arm.C23, arm.C34)
    Cs = (C1, arm.C2, arm.C3, arm.C4)
    Cm = np.diag(Cs).astype(float)
    for i, c in enumerate(Cc):
        Cm[i, i] += c
        Cm[i + 1, i + 1] += c
        Cm[i, i + 1] = Cm[i + 1, i] = -c
    return Cm, (arm.L2, arm.L3, arm.L4)


def passive_resonances(netlist: Netlist, flux, mode: str, alpha: float = MAP_ALPHA) -> np.ndarray:
    """Open-port eigenfrequencies (Hz) of the mode-``mode`` ladder.

    These are the zero-phase points of the port reflection when the pump is
    negligible. ``flux`` may be an array; the result has shape ``(n_flux, 4)``
    in ascending order.
    """
    phi = np.atleast_1d(np.asarray(_jrm.as_phi_e(flux), dtype=float))
    L1 = np.atleast_1d(half_circuit_inductance(netlist.jrm, phi)) * (1.0 - alpha)
    Cm, L_rest = _ladder_matrices(netlist.arm(mode), 1.0, netlist.C1(mode))
    sqrtL = np.empty((phi.size, 4))
    sqrtL[:, 0] = np.sqrt(L1)
    sqrtL[:, 1:] = np.sqrt(L_rest)
    # w^-2 are the eigenvalues of sqrt(L) Cm sqrt(L)
    M = sqrtL[:, :, None] * Cm[None] * sqrtL[:, None, :]
    inv_w2 = np.linalg.eigvalsh(M)
    return np.sort(1.0 / (2 * np.pi * np.sqrt(inv_w2)), axis=1)


@dataclass
class ResonanceMap:
    """Reflection phase over a flux x frequency grid."""

    flux_phi0: np.ndarray
    freq: np.ndarray
    phase: np.ndarray  # (n_flux, n_freq)
    port: str


def resonance_map(
    netlist: Netlist,
    flux_phi0,
    f_grid,
    port: str = "a",
    alpha: float = MAP_ALPHA,
    pump_frequency: float | None = None,
) -> ResonanceMap:
    """Phase of the port reflection with a tiny conversion pump.

    The pump only regularizes the inverter. By default it is placed at twice
    the top of the grid so the idler lands far above every mode-b resonance
    and the map shows the passive resonances of ``port`` alone.
    """
    if port not in ("a", "b"):
        raise DomainError("port must be 'a' or 'b'")
    flux_phi0 = np.asarray(flux_phi0, dtype=float)
    f = np.asarray(f_grid, dtype=float)
    fp = 2.0 * f.max() if pump_frequency is None else pump_frequency
    flipped = _swap_ports(netlist) if port == "b" else netlist

    def row(x):
        wp = WorkingPoint(FluxBias.from_phi0(x), fp, alpha=alpha)
        S = abcd_to_s(coupled_cascade(flipped, wp, f, CONVERSION, alpha), netlist.Z0, on_singular="flag")
        return np.angle(S.S11)

    phase = np.array(ordered_map(row, flux_phi0)).reshape(flux_phi0.size, f.size)
    return ResonanceMap(flux_phi0, f, phase, port)


def _swap_ports(netlist: Netlist) -> Netlist:
    return replace(netlist, C_a=netlist.C_b, C_b=netlist.C_a, a=netlist.b, b=netlist.a)


# --- parameter vectors used by fitting ----------------------------------------

#: The 22 free values of a coupled netlist under arm symmetry.
NETLIST_PARAMS = (
    ("jrm", "L_in"), ("jrm", "L_out"), ("net", "C_a"), ("net", "C_b"),
    *(("a", f) for f in ARM_FIELDS), *(("b", f) for f in ARM_FIELDS),
)


def netlist_param_names():
    return [f"{grp}.{name}" if grp in "ab" else name for grp, name in NETLIST_PARAMS]


def netlist_to_vector(netlist: Netlist) -> np.ndarray:
    out = []
    for grp, name in NETLIST_PARAMS:
        src = {"jrm": netlist.jrm, "net": netlist, "a": netlist.a, "b": netlist.b}[grp]
        out.append(getattr(src, name))
    return np.array(out, dtype=float)


def netlist_from_vector(template: Netlist, x) -> Netlist:
    x = np.asarray(x, dtype=float)
    jrm = template.jrm.replace(L_in=x[0], L_out=x[1])
    a = ModeArm(*x[4:13])
    b = ModeArm(*x[13:22])
    return Netlist(jrm, x[2], x[3], a, b, template.Z0, "fitted")
