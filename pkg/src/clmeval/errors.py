"""Exception hierarchy.

Two families matter to callers: :class:`DataError` (bad input, exit code 2 on
the command line) and :class:`DegenerateError` (the input is well formed but a
measure is undefined on it, exit code 3).
"""


class CLMError(Exception):
    """Base class for every error raised by this package."""

    pair = None


class DataError(CLMError):
    pass


class DegenerateError(CLMError):
    pass


class EmptyInput(DataError):
    pass


class SchemaError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class TooFewRows(DataError):
    pass


class IoError(DataError):
    pass


class TooFewClasses(DegenerateError):
    pass


class ClassTooSmall(DegenerateError):
    pass


class DegenerateDispersion(DegenerateError):
    pass


class DegenerateCentroids(DegenerateError):
    pass


class DegenerateTargets(DegenerateError):
    pass


class DegenerateRanks(DegenerateError):
    pass


class CalibrationFailed(DegenerateError):
    pass


def annotate(err, context):
    """Return a copy of ``err`` with ``context`` prefixed to its message."""
    new = type(err).__new__(type(err))
    Exception.__init__(new, f"{context}: {err}")
    new.__dict__.update(err.__dict__)
    return new


def annotate_pair(err, pair):
    """Return a copy of ``err`` whose message names the failing class pair."""
    new = annotate(err, f"class pair ({pair[0]!r}, {pair[1]!r})")
    new.pair = pair
    return new
