"""Exception hierarchy shared by every module."""


class QexpError(Exception):
    """Base class for all errors raised by this package."""


class ConstructionError(QexpError):
    """An exact identity that must hold by construction failed."""


class DenominatorError(QexpError):
    """A value that should be integral after clearing denominators is not."""


class EvaluationError(QexpError):
    """Two independent enclosures of the same quantity are disjoint."""


class PrecisionExhausted(QexpError):
    """Precision escalation hit its cap without resolving the request."""


class DomainError(QexpError, ValueError):
    """Arguments fall outside the region where an operation is defined."""


class EnvelopeViolation(QexpError):
    """A growth or decay envelope failed on the audited grid."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
