class RmExitError(RuntimeError):
    """Base class for every error raised by rmexit."""


class SizeError(RmExitError):
    """Raised when a request exceeds a configured resource cap."""


class ArgumentError(RmExitError, ValueError):
    """Raised for out-of-range indices and violated preconditions."""


class CodeSpecError(RmExitError):
    """Raised when a code spec or generator file cannot be turned into a code."""


class SymmetryError(RmExitError):
    """Raised for singular affine maps and malformed permutations."""


class ThresholdError(RmExitError):
    """Raised when threshold estimation or fitting receives unusable input."""


class ConfigError(RmExitError):
    """Raised when settings or run configuration values are invalid."""
