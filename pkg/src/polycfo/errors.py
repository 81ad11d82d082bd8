"""Exception types shared across the simulator."""


class SimulatorError(Exception):
    """Base class for every failure raised by this package."""


class InvalidConfigurationError(SimulatorError, ValueError):
    """A parameter set violates a structural precondition (P < K, bad delay, ...)."""


class DegenerateMixtureError(SimulatorError):
    """The observation covariance does not expose enough independent directions."""


class SingularEqualizerError(SimulatorError):
    """The mixing estimate is rank deficient; a least-squares inverse does not exist."""


class UnfittableColumnError(SimulatorError):
    """A mixing-matrix column has too few usable phases for a frequency fit."""


class PilotGenerationError(SimulatorError):
    """No pilot set satisfying the cross-correlation bound within the retry budget."""


class NoPeakError(SimulatorError):
    """The pilot correlation objective is flat; there is no peak to locate."""


class UnsupportedScaleError(SimulatorError):
    """Exhaustive ambiguity matching is limited to small user counts."""
