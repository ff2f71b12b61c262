"""The sweep record shared by every frequency-domain calculation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DB_FLOOR = -200.0

S_LABELS = ("S_aa", "S_ab", "S_ba", "S_bb")


def to_db(x, floor: float = DB_FLOOR):
    """Power ratio of an amplitude in dB, clamped at ``floor``."""
    mag = np.abs(np.asarray(x))
    with np.errstate(divide="ignore"):
        out = 20.0 * np.log10(mag)
    return np.maximum(out, floor)


@dataclass
class SweepResult:
    """Complex scattering parameters on a signal-frequency grid.

    ``freq`` is the frequency at port a (the signal); ``idler_freq`` is the
    matching port-b frequency where it differs. ``s`` maps labels from
    ``S_LABELS`` (and optionally others) to complex arrays of ``freq``'s length.
    """

    freq: np.ndarray
    s: dict
    idler_freq: np.ndarray | None = None
    singular: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.freq = np.asarray(self.freq, dtype=float)
        n = self.freq.shape[0]
        for label, values in self.s.items():
            values = np.asarray(values, dtype=complex)
            if values.shape != (n,):
                raise ValueError(f"{label} has shape {values.shape}, expected ({n},)")
            self.s[label] = values
        if self.singular is None:
            self.singular = np.zeros(n, dtype=bool)
        self.singular = np.asarray(self.singular, dtype=bool)

    def __getitem__(self, label):
        return self.s[label]

    def db(self, label):
        return to_db(self.s[label])

    @property
    def singular_fraction(self) -> float:
        return float(np.mean(self.singular)) if self.singular.size else 0.0
