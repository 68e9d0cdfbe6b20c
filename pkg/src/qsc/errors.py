"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the range where an operation is defined."""


class PhysicalityError(ValueError):
    """A covariance matrix violates symmetry, positivity or the uncertainty principle."""


class ValidationError(ValueError):
    """Derived parameters are mutually inconsistent."""


class UnsupportedConfigurationError(ValueError):
    """An oracle was asked to simulate a state it cannot represent exactly."""


class CertificationError(ValueError):
    """Channel monitoring cannot certify the light fraction (e.g. no Bob singles)."""


class ValidityWarning(UserWarning):
    """A model is evaluated outside the regime where its approximations hold."""


class ConfigError(ValueError):
    """A configuration file or override names an unknown key or holds an invalid value."""
