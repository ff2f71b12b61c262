"""Circuit models for Josephson-ring-modulator mixers and amplifiers."""

__version__ = "0.1.0"
