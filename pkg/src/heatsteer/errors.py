"""Exception types shared across the package."""


class HeatsteerError(Exception):
    """Base class for all package errors."""


class PartitionError(HeatsteerError, ValueError):
    """Raised when a grid cannot be partitioned as requested."""


class NonFiniteFieldError(HeatsteerError, ArithmeticError):
    """Raised when NaN or Inf shows up in the temperature field."""


class SyncStallError(HeatsteerError, RuntimeError):
    """Synchronous run cannot make progress because a halo never arrived."""


class LinkDownError(HeatsteerError, RuntimeError):
    """Send or poll on a link that is closed or was never opened."""


class FrameError(HeatsteerError, RuntimeError):
    """Malformed or oversized frame on the wire."""


class ScenarioError(HeatsteerError, ValueError):
    """Scenario file could not be parsed; message carries file:line."""


class MonitorSoundnessError(HeatsteerError, AssertionError):
    """A CONVERGED state was reached whose frozen field violates the tolerance.

    This is an internal self-check; it firing means the convergence
    protocol is broken, not that the input was bad.
    """
