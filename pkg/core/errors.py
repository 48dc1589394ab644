"""Exception hierarchy shared by the library and the command line."""


class SopMonitorError(Exception):
    """Base class for all errors raised by the monitoring library"""
    exit_code = 1


class SopValidationError(SopMonitorError, ValueError):
    """Invalid input, parameter or configuration"""
    exit_code = 2


class DimensionError(SopValidationError):
    pass


class NonFiniteError(SopValidationError):
    pass


class ScaleError(SopValidationError):
    pass


class DelayError(SopValidationError):
    pass


class OverlapError(SopValidationError):
    pass


class DegenerateError(SopValidationError):
    pass


class ConfigError(SopValidationError):
    pass


class ParamError(SopValidationError):
    pass


class StationarityError(SopValidationError):
    pass


class ModelError(SopValidationError):
    pass


class SchemaError(SopValidationError):
    pass


class ShapeError(SopValidationError):
    pass


class SopConvergenceError(SopMonitorError, RuntimeError):
    """A numerical search or solver did not reach its target"""
    exit_code = 3


class ConvergenceError(SopConvergenceError):
    pass


class BracketError(SopConvergenceError):
    pass


class NonConvergence(SopConvergenceError):
    """Limit search ran out of evaluations; `result` holds the partial search"""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class CapWarning(UserWarning):
    """Some simulated runs were truncated at the run-length cap"""
