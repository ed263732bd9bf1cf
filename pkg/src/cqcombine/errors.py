"""Exception hierarchy shared by all modules."""


class CqError(ValueError):
    """Base class for every error raised by this package."""


class NotHermitian(CqError):
    pass


class NoConvergence(CqError, ArithmeticError):
    pass


class InvalidState(CqError):
    pass


class DimensionMismatch(CqError):
    pass


class OutOfRange(CqError):
    pass


class InvalidChannel(CqError):
    pass


class NonUniformPrior(CqError):
    """Raised by constructions that are only defined for prior 1/2."""


class ChainRuleViolation(CqError, ArithmeticError):
    """H(W1 boxast W2) + H(W1 varoast W2) drifted from H(W1) + H(W2): a numerical fault."""


class InvalidEnsemble(CqError):
    pass


class EqualityFormMismatch(CqError, ArithmeticError):
    pass


class DimensionBudgetExceeded(CqError):
    pass


class BadLength(CqError):
    pass
