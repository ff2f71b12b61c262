"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code: each oracle is derived
from the circuit equations directly, often by a different method.
"""

import mpmath as mp
import numpy as np
from scipy import constants as sc
from scipy.optimize import brentq


def L_J0(I0):
    return sc.hbar / (2 * sc.e) / I0


def phi_j_exact(alpha_J, phi_e):
    """Root of ``phi + alpha_J sin(phi) = phi_e / 4`` (the unexpanded relation)."""
    q = phi_e / 4.0
    if q == 0:
        return 0.0
    lo, hi = q - 1.5 * alpha_J - 1e-9, q + 1.5 * alpha_J + 1e-9
    return brentq(lambda x: x + alpha_J * np.sin(x) - q, lo, hi, xtol=1e-15)


def circulating_current_mp(I0, L_s, phi_e, dps=40):
    """Circulating current from the second-order junction phase, in mpmath."""
    with mp.workdps(dps):
        I0 = mp.mpf(I0)
        a = mp.mpf(L_s) / (mp.mpf(sc.hbar) / (2 * mp.mpf(sc.e)) / I0)
        q = mp.mpf(phi_e) / 4
        phj = q - a * mp.sin(q) + a**2 / 2 * mp.sin(2 * q)
        return float(I0 * mp.sin(phj))


def delta_m_mp(I0, L_s, phi_e, Ip, dps=40):
    with mp.workdps(dps):
        I0 = mp.mpf(I0)
        LJ0 = mp.mpf(sc.hbar) / (2 * mp.mpf(sc.e)) / I0
        a = mp.mpf(L_s) / LJ0
        q = mp.mpf(phi_e) / 4
        phj = q - a * mp.sin(q) + a**2 / 2 * mp.sin(2 * q)
        LJ = LJ0 / mp.cos(phj)
        return float(LJ * I0 * mp.sin(phj) / I0**2 * mp.mpf(Ip) / 2)


def mode_inductance(I0, L_s, L_in, L_out, phi_e):
    """Series/parallel arithmetic with the exact junction phase."""
    pj = phi_j_exact(L_s / L_J0(I0), phi_e)
    br = L_J0(I0) / np.cos(pj) + L_s
    return 2 * L_out + 1.0 / (1.0 / br + 1.0 / (2 * L_in))


def amplifier_linear_solve(L, C_a, C_b, Z0, alpha, f1, fp, phase=0.0):
    """Reflection amplifier by a direct solve of the pumped-circuit equations.

    Unknowns: signal node voltage and inductor current at ``f1`` and the
    conjugated idler voltage and current at ``fp - f1``. The modulated mutual
    ``m = sqrt(alpha) L`` couples each flux to the conjugate partner current.
    Returns ``(S_aa, S_ba)`` for a unit incident wave at port a.
    """
    w1, w2 = 2 * np.pi * f1, 2 * np.pi * (fp - f1)
    m = np.sqrt(alpha) * L
    e = np.exp(1j * phase)
    A = np.array([
        [1, 0, -1j * w1 * L, -1j * w1 * m * e],
        [0, 1, 1j * w2 * m / e, 1j * w2 * L],
        [1j * w1 * C_a + 1 / Z0, 0, 1, 0],
        [0, -1j * w2 * C_b + 1 / Z0, 0, 1],
    ], dtype=complex)
    b = np.array([0, 0, 2 / Z0, 0], dtype=complex)
    v = np.linalg.solve(A, b)
    return v[0] - 1, v[1]


def converter_linear_solve(L, C_a, C_b, Z0, alpha, f1, fp, phase=0.0):
    """Same as :func:`amplifier_linear_solve` for up-conversion to ``f1 + fp``."""
    w1, w2 = 2 * np.pi * f1, 2 * np.pi * (f1 + fp)
    m = np.sqrt(alpha) * L
    e = np.exp(1j * phase)
    A = np.array([
        [1, 0, -1j * w1 * L, -1j * w1 * m / e],
        [0, 1, -1j * w2 * m * e, -1j * w2 * L],
        [1j * w1 * C_a + 1 / Z0, 0, 1, 0],
        [0, 1j * w2 * C_b + 1 / Z0, 0, 1],
    ], dtype=complex)
    b = np.array([0, 0, 2 / Z0, 0], dtype=complex)
    v = np.linalg.solve(A, b)
    return v[0] - 1, v[1]


def cmt_conversion(ga, gb, rho, delta):
    """Two-mode input-output solve for conversion at detuning ``delta`` (rad/s).

    Intracavity equations ``(gk/2 - i delta) a_k = sqrt(gk) in_k - i g a_j``
    with ``g = rho sqrt(ga gb)/2``; outputs ``out = sqrt(gk) a_k - in_k``.
    """
    g = rho * np.sqrt(ga * gb) / 2
    M = np.array([[ga / 2 - 1j * delta, 1j * g], [1j * g, gb / 2 - 1j * delta]])
    a = np.linalg.solve(M, np.array([np.sqrt(ga), 0]))
    return np.sqrt(ga) * a[0] - 1, np.sqrt(gb) * a[1]


def lorentzian_crossings(fn, f0, lo, hi, level):
    """Both roots of ``fn(f) = level`` on either side of ``f0``."""
    return brentq(lambda x: fn(x) - level, lo, f0), brentq(lambda x: fn(x) - level, f0, hi)
