"""Exception classes, each mapped to a distinct CLI exit code."""


class GkpForgeError(Exception):
    exit_code = 1


class ConfigError(GkpForgeError, ValueError):
    """Malformed or out-of-range configuration."""
    exit_code = 2


class UnconvergedError(GkpForgeError, RuntimeError):
    """Truncation (Fock cutoff or ladder window) lost more norm than allowed."""
    exit_code = 3


class ValidationFailure(GkpForgeError):
    exit_code = 4


class ZeroProbabilityError(GkpForgeError, ArithmeticError):
    """A post-selection branch (or a state norm) is numerically zero."""
    exit_code = 5
