"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """A search or enumeration space exceeds its configured cap."""


class OptimizationError(RuntimeError):
    """No optimization start produced a usable result."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""
