"""Exception types shared across the package."""


class SingularGeometry(ValueError):
    """Anchor angles leave the Fisher information matrix (numerically) singular."""


class QuadratureError(RuntimeError):
    """A numerical integral failed to reach its tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(ValueError):
    """Invalid or inconsistent simulation / network configuration."""
