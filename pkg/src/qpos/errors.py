"""Exception taxonomy shared across the package."""


class QposError(Exception):
    """Base class for package-specific failures."""


class PreconditionError(QposError):
    """An operation was called outside its stated contract."""


class EvaluationError(QposError):
    """A callable produced a non-finite value where a finite one is required."""


class InternalCheckError(QposError):
    """A must-not-happen internal consistency check tripped (bug signal)."""
