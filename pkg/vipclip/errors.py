class VipClipError(Exception):
    """Base class for every error raised by the library"""


class InvalidParameterError(VipClipError, ValueError):
    """A parameter is outside its documented domain"""


class DimensionMismatchError(InvalidParameterError):
    """A vector does not match the problem dimension"""


class MissingConstantError(VipClipError):
    """A probe or schedule needs a structural constant the problem does not certify"""


class PreconditionError(VipClipError):
    """A mathematical precondition of a bound or estimator does not hold"""


class NotMonotoneError(PreconditionError):
    """The restricted gap is only a valid criterion for monotone operators"""


class ScheduleError(VipClipError):
    """Schedule parameters violate the conditions of the corresponding theorem"""


class ConvergenceError(VipClipError):
    """An inner numerical routine did not reach its tolerance"""


class ConfigError(VipClipError):
    """An experiment configuration file failed validation"""

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])

    def __str__(self) -> str:
        if not self.diagnostics:
            return super().__str__()
        return super().__str__() + "\n" + "\n".join(f"  {d}" for d in self.diagnostics)
