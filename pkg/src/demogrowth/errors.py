"""Exception hierarchy shared by every module.

The CLI maps each family onto an exit code: configuration problems exit
with 1, data problems with 2 and numerical failures with 3.
"""


class DemogrowthError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 3


class ConfigError(DemogrowthError):
    exit_code = 1


class InvalidSpec(DemogrowthError):
    """Unsupported test/trend combination."""

    exit_code = 1


class DataError(DemogrowthError):
    exit_code = 2


class DegenerateInput(DataError):
    """Too few observations, zero variance or an empty result."""


class DomainError(DataError):
    """A value lies outside the mathematical domain of an operation."""


class AlignmentError(DataError):
    """Series that must share a year index do not."""


class IngestError(DataError):
    pass


class NumericalError(DemogrowthError):
    exit_code = 3


class SingularDesign(NumericalError):
    """Regression design matrix without full column rank."""


class PerfectCointegration(SingularDesign):
    """First-step residuals vanish identically, so no residual test can run."""


class SingularSystem(NumericalError):
    """Singular product-moment matrix in the reduced-rank regression."""


class ModelBreakdown(NumericalError):
    """Population recursion would turn non-positive."""


class CalibrationError(NumericalError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class ReportIOError(DemogrowthError, OSError):
    exit_code = 2
