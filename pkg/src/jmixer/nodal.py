"""Nodal model of a pumped two-mode network in node-flux variables.

The pumped ring appears as a Hermitian inductance matrix between the ring
nodes of the two sides, ``[[L_a, m e^{+-j phi}], [m e^{-+j phi}, L_b]]`` with
``m = sqrt(alpha L_a L_b)``. The idler block is written at the shifted
complex frequency ``s - j w_p`` (amplification, conjugated idler variables)
or ``s + j w_p`` (conversion). Port nodes are terminated in ``1/Z0``.

This gives two things the transfer-matrix route cannot: the natural
frequencies of the pumped network (stability), and a direct linear solve of
the response that is independent of the cascade algebra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError
from .twoport import AMPLIFICATION, CONVERSION, check_mode


@dataclass(frozen=True)
class NodalSide:
    """Ladder of one mode: node 0 is the ring node, the last node the port.

    ``Cm`` is the nodal capacitance matrix, ``L`` the shunt inductance to
    ground at each node (``inf`` for none; the ring node's entry is its bare
    inductance), ``G`` optional shunt conductances.
    """

    Cm: np.ndarray
    L: np.ndarray
    G: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.L)

    def conductance(self) -> np.ndarray:
        return np.zeros(self.n) if self.G is None else np.asarray(self.G, dtype=float)


@dataclass(frozen=True)
class NodalNetwork:
    a: NodalSide
    b: NodalSide
    alpha: float
    pump_phase: float = 0.0
    Z0: float = 50.0

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise DomainError("alpha must lie in [0, 1)")


def _blocks(net: NodalNetwork, mode: str):
    """Block matrices (C, G, Gamma) of the combined system, a nodes first."""
    na, nb = net.a.n, net.b.n
    n = na + nb
    C = np.zeros((n, n))
    C[:na, :na] = net.a.Cm
    C[na:, na:] = net.b.Cm
    G = np.zeros((n, n))
    G[:na, :na] = np.diag(net.a.conductance())
    G[na:, na:] = np.diag(net.b.conductance())
    G[na - 1, na - 1] += 1.0 / net.Z0
    G[n - 1, n - 1] += 1.0 / net.Z0
    Gam = np.zeros((n, n), dtype=complex)
    for off, side in ((0, net.a), (na, net.b)):
        inv_L = 1.0 / np.asarray(side.L, dtype=float)
        Gam[off:off + side.n, off:off + side.n] = np.diag(inv_L)
    La, Lb = net.a.L[0], net.b.L[0]
    sign = 1.0 if mode == AMPLIFICATION else -1.0
    m = np.sqrt(net.alpha * La * Lb) * np.exp(1j * sign * net.pump_phase)
    Lring = np.array([[La, m], [np.conj(m), Lb]])
    ring = [0, na]
    Gam[np.ix_(ring, ring)] = np.linalg.inv(Lring)
    return C, G, Gam, na


def _shift(mode: str, f_pump: float) -> complex:
    wp = 2 * np.pi * f_pump
    return -1j * wp if mode == AMPLIFICATION else 1j * wp


def natural_frequencies(net: NodalNetwork, mode: str, f_pump: float) -> np.ndarray:
    """Complex exponents ``s`` (rad/s) of the free response, signal frame.

    A root with ``Re(s) > 0`` is a growing solution: the pumped network
    oscillates.
    """
    check_mode(mode)
    C, G, Gam, na = _blocks(net, mode)
    n = C.shape[0]
    d = _shift(mode, f_pump)
    # idler block: C (s+d)^2 + G (s+d) + Gam = C s^2 + (G + 2 d C) s + (Gam + d^2 C + d G)
    D = G.astype(complex)
    K = Gam.copy()
    ib = slice(na, n)
    D[ib, ib] += 2 * d * C[ib, ib]
    K[ib, ib] += d * d * C[ib, ib] + d * G[ib, ib]
    # scale time to ns for conditioning
    t = 1e-9
    Ms, Ds, Ks = C, D * t, K * t * t
    Minv = np.linalg.inv(Ms)
    A = np.block([[np.zeros((n, n)), np.eye(n)], [-Minv @ Ks, -Minv @ Ds]])
    return scipy.linalg.eigvals(A) / t


def stability_margin(net: NodalNetwork, mode: str, f_pump: float) -> float:
    """Largest real part of the natural exponents, in rad/s (negative is stable)."""
    return float(np.max(natural_frequencies(net, mode, f_pump).real))


def is_stable(net: NodalNetwork, mode: str, f_pump: float, tol: float = 0.0) -> bool:
    return stability_margin(net, mode, f_pump) < -tol


def nodal_sparams(net: NodalNetwork, mode: str, f_pump: float, f_grid) -> dict:
    """Scattering parameters from a direct nodal solve at each signal frequency.

    Labels and conventions match the cascade route: in amplification the
    port-b waves are the conjugated idler waves.
    """
    check_mode(mode)
    C, G, Gam, na = _blocks(net, mode)
    n = C.shape[0]
    d = _shift(mode, f_pump)
    f = np.asarray(f_grid, dtype=float)
    out = {k: np.empty(f.size, dtype=complex) for k in ("S_aa", "S_ab", "S_ba", "S_bb")}
    pa, pb = na - 1, n - 1
    for i, fi in enumerate(f):
        s = 2j * np.pi * fi
        sig = np.full(n, s, dtype=complex)
        sig[na:] += d
        K = C * (sig[:, None] ** 2) + G * sig[:, None] + Gam
        rhs = np.zeros((n, 2), dtype=complex)
        rhs[pa, 0] = 2.0 / net.Z0
        rhs[pb, 1] = 2.0 / net.Z0
        psi = np.linalg.solve(K, rhs)
        V = psi * sig[:, None]
        out["S_aa"][i] = V[pa, 0] - 1.0
        out["S_ba"][i] = V[pb, 0]
        out["S_ab"][i] = V[pa, 1]
        out["S_bb"][i] = V[pb, 1] - 1.0
    return out


def resonant_network(params, wp) -> NodalNetwork:
    """Single-node sides for a resonant-mode mixer."""
    from .resonant import mode_inductance, pump_alpha

    L = float(mode_inductance(params, wp.flux))
    a = NodalSide(np.array([[params.C_a]]), np.array([L]), np.array([params.G_a]))
    b = NodalSide(np.array([[params.C_b]]), np.array([L]), np.array([params.G_b]))
    return NodalNetwork(a, b, pump_alpha(params, wp), wp.pump_phase, params.Z0)


def _ladder_side(arm, L1, C1) -> NodalSide:
    Cc = (arm.C12, arm.C23, arm.C34)
    Cs = (C1, arm.C2, arm.C3, arm.C4)
    Cm = np.diag(Cs).astype(float)
    for i, c in enumerate(Cc):
        Cm[i, i] += c
        Cm[i + 1, i + 1] += c
        Cm[i, i + 1] = Cm[i + 1, i] = -c
    return NodalSide(Cm, np.array([L1, arm.L2, arm.L3, arm.L4], dtype=float))


def coupled_network(netlist, wp, alpha: float | None = None) -> NodalNetwork:
    """Four-node ladders per side for a coupled-mode netlist."""
    from .coupled import coupled_alpha, half_circuit_inductance

    if alpha is None:
        alpha = coupled_alpha(netlist, wp)
    L1 = float(half_circuit_inductance(netlist.jrm, wp.flux))
    a = _ladder_side(netlist.a, L1, netlist.C1("a"))
    b = _ladder_side(netlist.b, L1, netlist.C1("b"))
    return NodalNetwork(a, b, alpha, wp.pump_phase, netlist.Z0)


__all__ = [
    "AMPLIFICATION",
    "CONVERSION",
    "NodalNetwork",
    "NodalSide",
    "coupled_network",
    "is_stable",
    "natural_frequencies",
    "nodal_sparams",
    "resonant_network",
    "stability_margin",
]
