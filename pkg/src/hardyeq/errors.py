"""Exception types raised across the package."""


class HardyError(Exception):
    """Base class for package errors."""


class OutOfDomain(HardyError, ValueError):
    """A point or interval lies outside a weight's domain."""


class WeightParseError(HardyError, ValueError):
    """Malformed weight literal."""


class ConditionViolated(HardyError):
    """A divergence precondition on a weight fails on the half-line."""


class HypothesisViolated(HardyError):
    """An instance does not satisfy the hypotheses of the requested theorem."""


class RegimeMismatch(HardyError):
    """No characterization covers the requested exponents/kind."""


class ZeroWitness(HardyError, ValueError):
    """Ratio requested for the zero function."""


class BudgetExceeded(HardyError):
    """Combinatorial search would exceed its evaluation budget."""


class NotApplicable(HardyError):
    """Method cannot be used for these exponents."""


class DegenerateInstance(HardyError):
    """Best constant too small for a meaningful comparison."""
