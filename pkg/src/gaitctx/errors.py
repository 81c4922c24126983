"""Exception types raised across the package."""


class GaitCtxError(Exception):
    """Base class for all package errors."""


class InvalidInput(GaitCtxError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateTraining(GaitCtxError, ValueError):
    """Training data cannot support a fit (e.g. a single class)."""


class NotFitted(GaitCtxError, RuntimeError):
    """A transform or model was used before being fitted."""
