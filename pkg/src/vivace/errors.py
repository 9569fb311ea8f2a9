"""Shared exception hierarchy."""


class VivaceError(Exception):
    """Base class for every error raised by this package."""


class EvalError(VivaceError):
    """A statement could not be evaluated (bad arithmetic, bad source, bad parameter).

    Carries optional position info so collected errors can be reported
    against the offending source line.
    """

    def __init__(self, message, line=None, col=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def at(self, span):
        """Copy of this error pinned to a source span."""
        return type(self)(self.message, line=span.line, col=span.col)


class DivisionByZero(EvalError):
    """Division by zero during sequence or comprehension evaluation."""

    def __init__(self, message, index=None, **kw):
        super().__init__(message, **kw)
        self.index = index


class UnboundVariable(EvalError):
    """An arithmetic expression referenced a name that is not in scope."""
