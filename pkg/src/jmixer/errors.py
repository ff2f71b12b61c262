"""Exception hierarchy."""


class JMixerError(Exception):
    pass


class DomainError(JMixerError, ValueError):
    """Input outside the physical domain of an operation."""


class SingularFluxError(JMixerError):
    """Flux bias sits on an inductance divergence (cos of junction phase ~ 0)."""


class SingularNetworkError(JMixerError):
    """ABCD -> S denominator vanished (pumped network at an oscillation threshold)."""


class SynthesisInfeasibleError(JMixerError):
    """A synthesized shunt capacitance came out nonpositive."""

    def __init__(self, message, mode=None, stage=None):
        super().__init__(message)
        self.mode = mode
        self.stage = stage


class FitDegenerateError(JMixerError):
    """Data cannot separate the requested fit parameters."""


class InfeasibleBoundsError(JMixerError, ValueError):
    pass


class DivergenceError(JMixerError):
    """Geometric loop gain of a reflection model reached or exceeded unity."""


class SchemaError(JMixerError, ValueError):
    """Input file or flag set does not conform to the expected schema."""
