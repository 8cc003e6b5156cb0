"""Exception hierarchy.

Usage errors (bad arguments from a caller) are plain ``ValueError``; the
classes below cover model problems and resource caps, which the CLI maps to
distinct exit codes.
"""


class MPSimError(Exception):
    """Base class for all errors raised by mpsim."""


class ModelError(MPSimError, ValueError):
    """Structurally invalid network (bad variable index, duplicate name...)."""


class BnetSyntaxError(ModelError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class CapExceededError(MPSimError):
    """A configurable size or budget cap was hit."""


class FanInError(CapExceededError):
    pass


class SpaceExplosionError(CapExceededError):
    pass


class BudgetExceededError(CapExceededError):
    pass
