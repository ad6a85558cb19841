"""Exception types shared across the package."""


class PrewetError(Exception):
    """Base class for all package errors."""


class InvalidParameter(PrewetError):
    pass


class NonFiniteObjective(PrewetError):
    pass


class BracketFailure(PrewetError):
    pass


class EmptySupport(PrewetError):
    pass


class TruncationOverflow(PrewetError):
    """Height cutoff too low: marginal mass leaks above the truncation band."""


class SpecMismatch(PrewetError):
    pass


class ThresholdBeyondTruncation(PrewetError):
    pass


class IndexOrder(PrewetError):
    pass


class AreaDPBudget(PrewetError):
    pass


class NoConvergence(PrewetError):
    """Iteration cap hit. Carries the best estimate found so far."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class BudgetExceeded(PrewetError):
    pass


class NullEvent(PrewetError):
    pass


class InsufficientGrid(PrewetError):
    pass


class ConfigError(PrewetError):
    """Bad run configuration. `field` names the offending key when known."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
