"""Exception types shared across the package."""


class FracSpdeError(Exception):
    """Base class for all errors raised by fracspde."""


class DomainError(FracSpdeError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class AccuracyError(FracSpdeError, ArithmeticError):
    """A numerical routine could not reach its accuracy target.

    Carries the tolerance that was achieved, when known.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ResolutionError(FracSpdeError, ValueError):
    """The grid cannot resolve the requested object.

    ``required_n`` suggests a mode count that would pass the check.
    """

    def __init__(self, message, required_n=None):
        super().__init__(message)
        self.required_n = required_n


class ParameterError(FracSpdeError, ValueError):
    """An exponent or parameter combination violates an admissibility condition."""


class DimensionGateError(ParameterError):
    """Space dimension rejected by the white-noise well-posedness gate."""


class SizeError(FracSpdeError, ValueError):
    """A grid is too short for the requested stencil or band count."""


class ConfigError(FracSpdeError, ValueError):
    """A run configuration failed validation.

    ``pointer`` is the JSON pointer of the offending key.
    """

    def __init__(self, message, pointer=""):
        super().__init__(message)
        self.pointer = pointer
