class DomainError(ValueError):
    """An argument lies outside the domain of a mathematical operation."""


class ConfigError(ValueError):
    """An experiment or instance configuration is invalid."""


class ConvergenceError(RuntimeError):
    """A root-find that must succeed on valid input did not."""
