"""Exception hierarchy for molcomm.

Every error derives from MolcommError. Input problems also derive from
ValueError so callers that only know the standard library can still catch
them.
"""


class MolcommError(Exception):
    """Base class for all molcomm errors."""


class InvalidEnvironmentError(MolcommError, ValueError):
    """A FluidEnvironment or ChannelGeometry field violates its invariants."""


class DomainError(MolcommError, ValueError):
    """A physical argument is outside the domain of a density or CDF."""


class LengthMismatchError(MolcommError, ValueError):
    """A bit chunk or stream does not match the configured bits per symbol."""


class SymbolRangeError(MolcommError, ValueError):
    """A symbol index is outside 0..M-1."""


class DegenerateVarianceError(MolcommError, ValueError):
    """Gaussian approximation requested with zero arrival variance in strict mode."""


class DimensionMismatchError(MolcommError, ValueError):
    """Transition matrix and prior distribution disagree on the order M."""


class ConfigError(MolcommError, ValueError):
    """A run configuration is invalid."""

    def __init__(self, message: str, diagnostics: list | None = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or []


class ConvergenceError(MolcommError, RuntimeError):
    """The capacity iteration did not reach the requested bound gap."""

    def __init__(self, message: str, gap: float, iterations: int) -> None:
        super().__init__(message)
        self.gap = gap
        self.iterations = iterations
