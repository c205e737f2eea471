"""Exception hierarchy shared by every module."""


class JensenLikeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(JensenLikeError, ValueError):
    """Unknown catalog name or invalid constructor parameters."""


class DomainError(JensenLikeError, ValueError):
    """A function or CGF was evaluated outside its open domain."""


class SingularityError(DomainError):
    """The expectation being bounded is infinite for these parameters."""


class PreconditionError(JensenLikeError, ValueError):
    """Inputs violate a stated precondition of a bound."""


class InfeasibleError(JensenLikeError, RuntimeError):
    """A grid search found no feasible point."""


class ValidityError(JensenLikeError, RuntimeError):
    """A bound's validity condition failed, so its value is not a bound."""

    def __init__(self, message, failed=()):
        super().__init__(message)
        self.failed = tuple(failed)


class OracleError(JensenLikeError, RuntimeError):
    """An oracle could not produce a trustworthy estimate."""
