"""Exception hierarchy shared across the package.

Every error raised by this package derives from LinkReplayError so callers
(the CLI in particular) can distinguish "bad input data" from genuine bugs.
"""


class LinkReplayError(Exception):
    """Base class for all errors raised by linkreplay."""


class InputError(LinkReplayError):
    """Malformed or invalid input data (maps to CLI exit code 2)."""


# --- trace/scenario file errors -------------------------------------------

class MalformedRow(InputError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EmptyTrace(InputError):
    pass


class DuplicateTimestamp(InputError):
    pass


class NonUniformGrid(InputError):
    pass


class RangeViolation(InputError):
    pass


class GridViolation(InputError):
    pass


# --- pipeline errors -------------------------------------------------------

class EmptyInput(InputError):
    pass


class GridMismatch(InputError):
    pass


# --- emulation / replay errors --------------------------------------------

class TimeRegression(LinkReplayError):
    pass


class ScenarioMismatch(InputError):
    pass


class BindFailure(LinkReplayError):
    pass


class InvalidTransition(LinkReplayError):
    pass


class SessionNotFound(LinkReplayError):
    pass


# --- reporting errors ------------------------------------------------------

class IntervalMismatch(InputError):
    pass
