"""Exception types shared across the package."""


class InvalidModelError(ValueError):
    """A model ingredient violates its contract, e.g. a covariance that is not PSD."""


class ConfigError(ValueError):
    """A configuration file or CLI argument combination failed validation."""
