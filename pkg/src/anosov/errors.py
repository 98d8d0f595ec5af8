"""Error taxonomy shared by the whole package.

Callers can rely on the split: bad caller input raises InputError (or a
subclass), numerical breakdown inside an algorithm raises NumericError, and
blowing through an enumeration budget raises ResourceBudgetError.  Situations
that are expected outcomes of a computation (an element that is simply not
proximal, a low-confidence fit) are reported as tagged results, not
exceptions.
"""


class AnosovError(Exception):
    """Base class for all package errors."""


class InputError(AnosovError):
    """The caller handed us something outside an operation's domain."""


class ConfigurationError(InputError):
    """A scenario or config file is malformed or fails a sanity check."""


class UnsupportedModeError(InputError):
    """A requested mode exists but is not available for these arguments."""


class NumericError(AnosovError):
    """A numerical routine failed (non-convergence, overflow, degeneracy)."""


class ResourceBudgetError(AnosovError):
    """An enumeration would exceed its entry budget.

    Carries the offending bound so callers can report it.
    """

    def __init__(self, message: str, required: int | None = None,
                 budget: int | None = None):
        super().__init__(message)
        self.required = required
        self.budget = budget
