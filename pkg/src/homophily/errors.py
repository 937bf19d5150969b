"""Exception types shared across the package."""


class HomophilyError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(HomophilyError, ValueError):
    """A line of an input file could not be parsed."""

    def __init__(self, message, line_no=None, path=None):
        self.line_no = line_no
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line_no is not None:
            where += f"{line_no}:"
        super().__init__(f"{where} {message}" if where else message)


class ValidationError(HomophilyError, ValueError):
    """Input is well-formed but violates a data invariant."""


class NotFoundError(HomophilyError, LookupError):
    """A requested user (or users) does not exist."""

    def __init__(self, message, missing=()):
        self.missing = tuple(missing)
        super().__init__(message)

    def __str__(self):
        return self.args[0]


class GenerationError(HomophilyError, ValueError):
    """A synthetic-data configuration cannot be realised."""
