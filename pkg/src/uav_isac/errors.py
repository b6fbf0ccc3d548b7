"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, a physically infeasible model (QoS unreachable at any offset)
exits with 3, and validation failures exit with 1.
"""

from __future__ import annotations


class UavIsacError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(UavIsacError):
    """Malformed or inconsistent configuration input."""


class SingularMatrixError(UavIsacError):
    """A matrix inversion or solve hit a numerically singular operand."""


class NotPositiveDefiniteError(UavIsacError):
    """A matrix required to be symmetric positive definite is not."""


class InfeasibleQosError(UavIsacError):
    """The rate constraint cannot be met at any horizontal offset."""


class InfeasibleIntervalError(UavIsacError):
    """The per-slot feasible interval (rate set intersected with the
    reachable set) is empty or degenerate."""


class VelocityBoundError(UavIsacError):
    """A requested platform displacement exceeds the speed limit."""


class BracketError(UavIsacError):
    """Root bracketing failed: the derivative has the same sign at both
    endpoints.  Carries both endpoint derivatives for diagnosis."""

    def __init__(self, message: str, dg_lo: float, dg_hi: float):
        super().__init__(message)
        self.dg_lo = dg_lo
        self.dg_hi = dg_hi
