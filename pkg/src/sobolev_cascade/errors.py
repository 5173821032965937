"""Exception hierarchy shared by all subpackages.

Each class carries an ``exit_code`` used by the command line front end.
"""


class CascadeError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InputError(CascadeError, ValueError):
    exit_code = 2


class SizeError(InputError):
    """Requested size is outside the supported (memory guarded) range."""


class ContractError(InputError):
    """A precondition of an operation was violated by the caller."""


class ConsistencyError(CascadeError):
    """An internal invariant failed; indicates a bug, not bad input."""


class ResourceBudgetError(CascadeError):
    """An enumeration exceeded its configured candidate budget."""

    exit_code = 3

    def __init__(self, message, completed_stages=(), stats=None):
        super().__init__(message)
        self.completed_stages = list(completed_stages)
        self.stats = dict(stats or {})


class ConstructionError(CascadeError):
    exit_code = 3

    def __init__(self, message, family=None):
        super().__init__(message)
        self.family = family


class SearchExhaustedError(ConstructionError):
    pass


class NotApplicableError(InputError):
    pass


class NumericalError(CascadeError):
    exit_code = 4


class StiffnessError(NumericalError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ReductionError(NumericalError):
    pass


class TopologyError(NumericalError):
    pass


class CascadeStallError(NumericalError):
    def __init__(self, message, last_stage=None):
        super().__init__(message)
        self.last_stage = last_stage
