"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when points, balls or automorphisms do not fit their group."""


class ConfigError(ValueError):
    """Malformed experiment configuration (CLI exit code 2)."""


class AtomValidationError(ValueError):
    """An atom failed one of the (1, inf)-atom conditions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class RepresentationError(ValueError):
    """A grid function could not be split over the proposed balls."""

    def __init__(self, message, residual=0.0):
        super().__init__(message)
        self.residual = residual
