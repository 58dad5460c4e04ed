"""Exception types shared across the package."""


class MismatchError(ValueError):
    """Operands live in different spaces or on different grids."""


class FitError(RuntimeError):
    """Model fitting failed (degenerate sample, empty split, numerical failure)."""


class ConfigError(ValueError):
    """Invalid study configuration or malformed input file."""
