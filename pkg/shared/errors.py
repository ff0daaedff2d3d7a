"""
Exception hierarchy. Every error knows the CLI exit code it maps to:
1 for bad input, 2 for an exhausted search budget.
"""


class PrasaranError(Exception):
    exit_code = 1


class ValidationError(PrasaranError):
    exit_code = 1


class ConfigError(ValidationError):
    pass


class InvalidNetwork(ValidationError):
    pass


class TiedWeights(InvalidNetwork):
    def __init__(self, message, pairs=None):
        super().__init__(message)
        self.pairs = pairs or []


class SourceNotAtIntersection(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class InfeasibleInput(ValidationError):
    pass


class DisconnectedGrid(InvalidNetwork):
    pass


class EmptySegment(InvalidNetwork):
    pass


class InfeasibleN(ValidationError):
    pass


class UnknownPlanner(ValidationError):
    pass


class BudgetExceeded(PrasaranError):
    """
    Raised by the exact search when its inner-step budget runs out.

    `checkpoint` can be passed back as `resume=` to continue the search
    from the first unfinished member of T with the incumbent kept.
    """
    exit_code = 2

    def __init__(self, message, steps=0, checkpoint=None):
        super().__init__(message)
        self.steps = steps
        self.checkpoint = checkpoint


class PlannerInvariantError(PrasaranError, AssertionError):
    # A planner produced an output violating its own guarantee: a bug, not bad input
    exit_code = 3
