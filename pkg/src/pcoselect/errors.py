"""Error taxonomy shared by the library and the command line front end."""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (exit code 2)."""


class DataError(ValueError):
    """Unusable dataset: empty, malformed, or wrong columns (exit code 3)."""


class DimensionError(ValueError):
    """Data dimension incompatible with the requested kernels (exit code 4)."""


class VerificationFailure(RuntimeError):
    """A verification suite reported a violated bound (exit code 5)."""
