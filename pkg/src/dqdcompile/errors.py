"""Exception hierarchy shared by every module."""


class DQDError(Exception):
    """Base class for all package errors."""


class ValidationError(DQDError, ValueError):
    """Malformed input: wrong shape, non-finite entries, non-Hermitian generator."""


class ConstraintViolation(ValidationError):
    """A physical control constraint was broken (e.g. a negative pulse strength)."""


class CapacityError(ValidationError):
    """Requested system is larger than the dense simulator supports."""


class StructuralError(ValidationError):
    """An ansatz or schedule layout breaks the slotting rules."""


class SchemaError(DQDError):
    """A persisted file could not be decoded."""


class CompilationFailed(DQDError):
    """Training did not reach the admission threshold.

    The :class:`~dqdcompile.trainer.TrainReport` of the failed run is kept on
    ``report`` so callers can inspect it or retry with another learning rate.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
