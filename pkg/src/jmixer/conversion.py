"""Closed-form frequency conversion between two Lorentzian modes, and bandwidth metrics.

Scattering amplitudes here are photon-flux normalized, so that
``|S_aa|^2 + |S_ba|^2 = 1`` for a lossless converter. The pump sits at the
mode difference, ``w_2 = w_1 + (w_b - w_a)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .sweep import DB_FLOOR, SweepResult, to_db


@dataclass(frozen=True)
class ModeLinewidths:
    """Resonances (Hz) and linewidths ``gamma_k`` (angular, rad/s)."""

    f_a: float
    f_b: float
    gamma_a: float
    gamma_b: float

    def __post_init__(self):
        if min(self.f_a, self.f_b, self.gamma_a, self.gamma_b) <= 0:
            raise DomainError("frequencies and linewidths must be positive")
        if self.f_a == self.f_b:
            raise DomainError("mode frequencies must differ")

    @classmethod
    def from_hz(cls, f_a, f_b, gamma_a_hz, gamma_b_hz) -> "ModeLinewidths":
        """Build from linewidths given as ``gamma/2pi`` in Hz."""
        return cls(f_a, f_b, 2 * np.pi * gamma_a_hz, 2 * np.pi * gamma_b_hz)


@dataclass(frozen=True)
class PumpSetting:
    rho: float
    phase: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.rho) and self.rho >= 0):
            raise DomainError("rho must be >= 0")


def inverse_susceptibilities(lw: ModeLinewidths, f1):
    """``chi_a^-1(w_1)`` and ``chi_b^-1(w_2)`` with the matched pump."""
    d = 2 * np.pi * (np.asarray(f1, dtype=float) - lw.f_a)  # w_2 - w_b equals w_1 - w_a
    return 1 - 2j * d / lw.gamma_a, 1 - 2j * d / lw.gamma_b


def conversion_sparams(lw: ModeLinewidths, pump: PumpSetting, f1_grid) -> SweepResult:
    f1 = np.asarray(f1_grid, dtype=float)
    ca, cb = inverse_susceptibilities(lw, f1)
    r2 = pump.rho**2
    den = ca * cb + r2
    e = np.exp(1j * pump.phase)
    s = {
        "S_aa": (np.conj(ca) * cb - r2) / den,
        "S_bb": (ca * np.conj(cb) - r2) / den,
        "S_ab": 2j * pump.rho * np.conj(e) / den,
        "S_ba": 2j * pump.rho * e / den,
    }
    meta = {"model": "closed_form", "mode": "conversion", "rho": pump.rho, "pump_phase": pump.phase}
    return SweepResult(f1, s, idler_freq=f1 + (lw.f_b - lw.f_a), meta=meta)


@dataclass(frozen=True)
class BandwidthMetric:
    """A bandwidth with its crossing frequencies; ``defined`` is False when a
    curve fails to cross its threshold on both sides within the grid."""

    name: str
    threshold_db: float
    bandwidth: float = np.nan
    f_low: float = np.nan
    f_high: float = np.nan
    defined: bool = False

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "threshold_db": float(self.threshold_db),
            "bandwidth_hz": None if not self.defined else float(self.bandwidth),
            "f_low_hz": None if not self.defined else float(self.f_low),
            "f_high_hz": None if not self.defined else float(self.f_high),
            "defined": self.defined,
        }


def _cross(f, y, i, j, t):
    """Linear-in-dB crossing of level ``t`` between grid points ``i`` and ``j``."""
    if y[j] == y[i]:
        return f[i]
    return f[i] + (t - y[i]) * (f[j] - f[i]) / (y[j] - y[i])


def threshold_span(f, y_db, threshold, below: bool = True, hull: bool = False, name: str = "") -> BandwidthMetric:
    """Span where ``y_db`` is below (or above) ``threshold``.

    Without ``hull`` the span is the contiguous run through the extremum;
    with it, from the first to the last qualifying point. Crossings are
    interpolated linearly in dB. Runs touching the grid edge are undefined.
    """
    f = np.asarray(f, dtype=float)
    y = np.asarray(y_db, dtype=float)
    ok = np.where(np.isnan(y), False, y <= threshold if below else y >= threshold)
    if not ok.any():
        return BandwidthMetric(name, threshold)
    if hull:
        idx = np.flatnonzero(ok)
        lo, hi = idx[0], idx[-1]
    else:
        k = int(np.nanargmin(y) if below else np.nanargmax(y))
        if not ok[k]:
            return BandwidthMetric(name, threshold)
        lo = hi = k
        while lo > 0 and ok[lo - 1]:
            lo -= 1
        while hi < len(f) - 1 and ok[hi + 1]:
            hi += 1
    if lo == 0 or hi == len(f) - 1:
        return BandwidthMetric(name, threshold)
    fl = _cross(f, y, lo - 1, lo, threshold)
    fh = _cross(f, y, hi, hi + 1, threshold)
    return BandwidthMetric(name, threshold, fh - fl, fl, fh, True)


@dataclass(frozen=True)
class BandwidthMetrics:
    reflection_below_level: BandwidthMetric
    transmission_below_max: BandwidthMetric
    reflection_above_min: BandwidthMetric

    def as_list(self):
        return [self.reflection_below_level, self.transmission_below_max, self.reflection_above_min]


def bandwidth_metrics(
    sweep: SweepResult,
    level_db: float,
    reflection: str = "S_aa",
    transmission: str = "S_ba",
    hull: bool = False,
) -> BandwidthMetrics:
    """The three conversion bandwidth figures.

    1. reflection at or below ``-level`` (off-resonance reflection is 0 dB);
    2. transmission at or above ``max - level``;
    3. reflection at or below ``min + level``.

    ``hull`` applies the first-to-last-crossing span to metric 1.
    """
    if level_db <= 0:
        raise DomainError("level must be positive (dB)")
    f = sweep.freq
    r = sweep.db(reflection)
    t = sweep.db(transmission)
    m1 = threshold_span(f, r, -level_db, below=True, hull=hull, name="reflection_below_level")
    m2 = threshold_span(f, t, np.nanmax(t) - level_db, below=False, name="transmission_below_max")
    m3 = threshold_span(f, r, np.nanmin(r) + level_db, below=True, name="reflection_above_min")
    return BandwidthMetrics(m1, m2, m3)


@dataclass
class PumpSweep:
    rho: np.ndarray
    max_transmission_db: np.ndarray
    min_reflection_db: np.ndarray
    bandwidths: np.ndarray  # (n_rho, 3), NaN where undefined


def default_grid(lw: ModeLinewidths, n: int = 20001, span: float = 6.0) -> np.ndarray:
    """Signal grid of ``+-span`` times the larger linewidth around ``f_a``."""
    g = max(lw.gamma_a, lw.gamma_b) / (2 * np.pi)
    return np.linspace(lw.f_a - span * g, lw.f_a + span * g, n)


def pump_sweep(lw: ModeLinewidths, rho_grid, level_db: float = 3.0, f_grid=None) -> PumpSweep:
    rho = np.asarray(rho_grid, dtype=float)
    if np.any(rho < 0) or np.any(np.diff(rho) < 0):
        raise DomainError("rho grid must be nonnegative and ascending")
    f = default_grid(lw) if f_grid is None else np.asarray(f_grid, dtype=float)
    tmax = np.empty(rho.size)
    rmin = np.empty(rho.size)
    bws = np.full((rho.size, 3), np.nan)
    for i, x in enumerate(rho):
        sw = conversion_sparams(lw, PumpSetting(x), f)
        tmax[i] = np.max(to_db(sw["S_ba"]))
        rmin[i] = np.min(to_db(sw["S_aa"]))
        if x == 0:
            continue
        for j, m in enumerate(bandwidth_metrics(sw, level_db).as_list()):
            if m.defined:
                bws[i, j] = m.bandwidth
    return PumpSweep(rho, tmax, rmin, bws)


__all__ = [
    "DB_FLOOR",
    "BandwidthMetric",
    "BandwidthMetrics",
    "ModeLinewidths",
    "PumpSetting",
    "PumpSweep",
    "bandwidth_metrics",
    "conversion_sparams",
    "default_grid",
    "inverse_susceptibilities",
    "pump_sweep",
    "threshold_span",
]
