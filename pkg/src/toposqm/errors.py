"""Exception types raised across the package."""


class ToposError(Exception):
    """Base class for all package errors."""


class InvalidOperator(ToposError, ValueError):
    pass


class InvalidFamily(ToposError, ValueError):
    pass


class DimensionMismatch(ToposError, ValueError):
    pass


class NotCommuting(ToposError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotSubcontext(ToposError, ValueError):
    pass


class InvalidSubObject(ToposError, ValueError):
    pass


class SizeLimit(ToposError, RuntimeError):
    pass


class NotEmbedded(ToposError, ValueError):
    pass


class DirectionMismatch(ToposError, ValueError):
    pass


class IntegrityError(ToposError, ValueError):
    """A serialized universe or table does not satisfy its invariants."""


class UnknownContext(ToposError, KeyError):
    pass
