"""
Exceptions raised by the game engine, the class-function utilities and the experiment harness.
"""


class EFKPError(Exception):
    """Base class of all package-specific errors."""


class ProtocolViolation(EFKPError, ValueError):
    """A move that the forecasting protocol does not allow, e.g. |x| > c or c < 0."""


class CollateralViolation(EFKPError, RuntimeError):
    """Skeptic's capital dropped below zero, which indicates a bug in the betting strategy."""


class DomainError(EFKPError, ValueError):
    """An iterated logarithm or class function was evaluated outside of its domain."""


class QuadratureError(EFKPError, RuntimeError):
    """Adaptive quadrature did not converge or the integral appears to be divergent."""


class BlockingError(EFKPError, ValueError):
    """Blocking weights were requested for a series that cannot be split into summable blocks."""


class PathExhaustedError(EFKPError, IndexError):
    """A replayed path holds fewer rounds than requested."""


class ConfigError(EFKPError, ValueError):
    """Malformed experiment configuration or path specification."""
