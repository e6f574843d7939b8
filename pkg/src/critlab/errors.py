"""Exception types raised by critlab solvers and utilities."""


class CritlabError(Exception):
    """Base class for all critlab errors."""


class ConfigError(CritlabError):
    """Invalid run configuration (unknown key, out-of-range value)."""


class BracketFailure(CritlabError):
    """No sign change of the shooting discriminant over the amplitude range."""


class SingularStartup(CritlabError):
    """Startup series at r0 is not a valid expansion for these parameters."""


class TailUnresolved(CritlabError):
    """Exponential tail contributes more than the requested accuracy."""


class IterationStall(CritlabError):
    """Inverse iteration failed to converge within max_iters."""


class OriginOutside(CritlabError):
    """Domain does not contain 0 as an interior point."""


class NonIntegrableWeight(CritlabError):
    """Weight exponent makes the integral divergent near the origin."""


class ZeroFunction(CritlabError):
    """Operation requires a nonzero grid function."""


class MassViolation(CritlabError):
    """Grid function does not satisfy the unit-mass constraint."""


class OutsideDomain(CritlabError):
    """Evaluation point lies outside the closed domain."""


class DomainTooSmall(CritlabError):
    """Cutoff support B_{2R}(0) does not fit inside the domain."""


class NotConverged(CritlabError):
    """Gradient flow hit max_iters before reaching tolerance.

    Carries the partial result (if any) on the ``partial`` attribute.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EnergyDiverged(CritlabError):
    """Probe-mode flow energy fell below the configured floor.

    Carries the last recorded energy on ``energy``.
    """

    def __init__(self, message, energy=None):
        super().__init__(message)
        self.energy = energy


class NonPositive(CritlabError):
    """Flow iterate lost positivity even at the minimum time step."""


class InsufficientSpan(CritlabError):
    """Not enough records (or gap decades) to fit scaling laws."""


class IoFailure(CritlabError):
    """Filesystem error while writing a run archive."""
