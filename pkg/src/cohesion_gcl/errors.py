"""Exception hierarchy shared by every module."""


class CohesionGCLError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ArgumentError(CohesionGCLError, ValueError):
    exit_code = 2


class FormatError(CohesionGCLError):
    """A dataset file is missing or structurally inconsistent."""

    exit_code = 3


class ParseError(FormatError):
    """A token in a dataset file could not be read as an integer/real."""


class IoError(CohesionGCLError, OSError):
    exit_code = 4


class EmptyError(CohesionGCLError, ValueError):
    """An operation needs a non-empty structure (edges, cohesive set, ...)."""

    exit_code = 5


class DegenerateFoldError(CohesionGCLError, ValueError):
    exit_code = 5


class DivergedError(CohesionGCLError, FloatingPointError):
    """Training produced non-finite parameters."""

    exit_code = 6

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite parameters after step {step}")
