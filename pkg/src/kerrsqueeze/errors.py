"""Exception types shared across the package."""


class KerrSqueezeError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(KerrSqueezeError):
    """Basis size too small or inconsistent for the requested operation."""


class InvalidParameterError(KerrSqueezeError):
    """Parameter outside the physically meaningful range."""


class DimensionMismatchError(KerrSqueezeError):
    """Operands live in different truncated Fock spaces."""


class TruncationFault(KerrSqueezeError):
    """State population leaked into the top of the truncated basis."""


class DegeneratePhaseError(KerrSqueezeError):
    """Ring scan has no contrast; the rotation phase is undefined."""


class AperiodicTraceError(KerrSqueezeError):
    """No secondary autocorrelation peak; the trace has no period."""


class FitFailureError(KerrSqueezeError):
    """Nonlinear fit did not converge within its iteration cap."""


class UnderDeterminedError(KerrSqueezeError):
    """Fewer samples than degrees of freedom in the reconstruction."""


class IntegratorError(KerrSqueezeError):
    """Step-size control failed to reach the requested tolerance."""


class ConfigError(KerrSqueezeError):
    """Configuration file violates the strict schema."""


class TruncationWarning(UserWarning):
    """Operator built close to the truncation budget of the basis."""
