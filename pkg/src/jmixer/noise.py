"""Noise rise of the output chain and SNR improvement of a phase-preserving amplifier."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize

from .constants import HBAR, KB
from .errors import DomainError, FitDegenerateError

N_VAC = 0.5
T_N_BOUNDS = (1.0, 20.0)
N_ADD_BOUNDS = (0.0, 5.0)


def photon_temperature(f: float) -> float:
    """``hbar w / k_B`` in kelvin."""
    return HBAR * 2 * np.pi * f / KB


@dataclass(frozen=True)
class NoiseChainParams:
    T_N: float
    n_add: float
    T_Q: float
    n_vac: float = N_VAC

    def __post_init__(self):
        if not self.T_N > 0:
            raise DomainError("T_N must be positive")
        if self.n_add < 0:
            raise DomainError("n_add must be >= 0")
        if not self.T_Q > 0:
            raise DomainError("T_Q must be positive")

    @classmethod
    def at_frequency(cls, T_N: float, n_add: float, f: float) -> "NoiseChainParams":
        return cls(T_N, n_add, photon_temperature(f))


def _check_gain(G):
    G = np.asarray(G, dtype=float)
    if np.any(G < 1):
        raise DomainError("gain must be >= 1 (power ratio)")
    return G


def noise_rise(p: NoiseChainParams, G):
    G = _check_gain(G)
    return (p.T_N + G * p.T_Q * p.n_vac + (G - 1) * p.T_Q * p.n_add) / (p.T_N + p.T_Q)


def snr_improvement(p: NoiseChainParams, G):
    G = _check_gain(G)
    return (p.T_N + p.T_Q) / (p.T_N / G + p.T_Q * (p.n_vac + p.n_add * (G - 1) / G))


def snr_plateau(p: NoiseChainParams) -> float:
    """High-gain limit of the SNR improvement."""
    return (p.T_N + p.T_Q) / (p.T_Q * (p.n_vac + p.n_add))


def unity_rise_gain(n_add: float, n_vac: float = N_VAC) -> float:
    """Gain above which the noise rise exceeds one, ``(1 + n_add)/(n_vac + n_add)``."""
    return (1.0 + n_add) / (n_vac + n_add)


@dataclass(frozen=True)
class NoiseFit:
    params: NoiseChainParams
    rms_relative_residual: float
    stderr: tuple  # (T_N, n_add), from the Jacobian at the optimum
    condition: float


def fit_noise(G, G_N, f_mode: float, restarts: int = 5, seed: int = 0, min_span_db: float = 10.0) -> NoiseFit:
    """Fit ``T_N`` and ``n_add`` to measured gain ``G`` and noise rise ``G_N``.

    The model is the SNR improvement ``G/G_N``, with ``T_Q`` taken at ``f_mode``.

    Relative least squares in linear units; bounded simplex from seeded starts,
    then a trust-region polish from the best start.

    Raises
    ------
    FitDegenerateError
        Fewer than three points, a gain span below ``min_span_db``, or a
        singular Jacobian at the optimum.
    """
    G = np.asarray(G, dtype=float)
    G_N = np.asarray(G_N, dtype=float)
    if G.shape != G_N.shape or G.ndim != 1:
        raise DomainError("G and G_N must be 1-D arrays of equal length")
    if G.size < 3:
        raise FitDegenerateError("need at least three (G, G/G_N) points")
    _check_gain(G)
    if np.any(G_N <= 0):
        raise DomainError("noise rise must be positive")
    y = G / G_N
    if 10 * np.log10(G.max() / G.min()) < min_span_db:
        raise FitDegenerateError(f"gain span below {min_span_db} dB cannot separate T_N from n_add")
    order = np.lexsort((y, G))
    G, y = G[order], y[order]
    T_Q = photon_temperature(f_mode)

    def resid(x):
        return snr_improvement(NoiseChainParams(x[0], x[1], T_Q), G) / y - 1.0

    def cost(x):
        r = resid(x)
        return float(r @ r)

    lo = np.array([T_N_BOUNDS[0], N_ADD_BOUNDS[0]])
    hi = np.array([T_N_BOUNDS[1], N_ADD_BOUNDS[1]])
    rng = np.random.default_rng(seed)
    starts = [0.5 * (lo + hi)] + [lo + (hi - lo) * rng.random(2) for _ in range(max(restarts, 1) - 1)]
    best = None
    for x0 in starts:
        res = minimize(cost, x0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
                       options={"xatol": 1e-10, "fatol": 1e-16, "maxiter": 4000})
        if best is None or res.fun < best.fun:
            best = res
    pol = least_squares(resid, np.clip(best.x, lo, hi), bounds=(lo, hi), method="trf",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    x = pol.x if cost(pol.x) <= best.fun else best.x
    J = pol.jac
    s = np.linalg.svd(J, compute_uv=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    if not np.isfinite(cond) or cond > 1e10:
        raise FitDegenerateError("flat residual valley: T_N and n_add are not separable")
    r = resid(x)
    dof = max(G.size - 2, 1)
    cov = np.linalg.pinv(J.T @ J) * float(r @ r) / dof
    stderr = tuple(np.sqrt(np.clip(np.diag(cov), 0, None)))
    return NoiseFit(NoiseChainParams(x[0], x[1], T_Q), float(np.sqrt(np.mean(r**2))), stderr, cond)
