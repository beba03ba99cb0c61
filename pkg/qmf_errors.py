"""
Toolkit Errors
==============
Exception hierarchy shared by every module.

- Library code raises; only app.py catches and turns errors into exit codes.
"""


class QmfError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(QmfError):
    """Invalid input or a violated invariant.

    ``invariant`` names the rule that failed when there is one.
    """

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant


class PoleError(ValidationError):
    """Argument sits on a pole of a map or of a Laurent polynomial."""

    def __init__(self, map_name, value=None):
        message = f"{map_name} has a pole at {value!r}" if value is not None else f"{map_name} has a pole here"
        super().__init__(message, invariant=map_name)
        self.map_name = map_name


class RealizabilityError(ValidationError):
    """Pole on the unit circle or on an evaluation grid point."""


class InvalidAllPassError(ValidationError):
    """Function is not an even all-pass with a pole of order >= 2 at 0."""


class SymmetryViolationError(ValidationError):
    """Filter fails one of the 0-SYM identities; ``identity`` names it."""

    def __init__(self, message, identity):
        super().__init__(message, invariant=identity)
        self.identity = identity


class PreconditionError(ValidationError):
    """Requested accuracy cannot be honoured by the construction."""


class DocumentError(ValidationError):
    """Corrupted or inconsistent filter/cascade document."""
