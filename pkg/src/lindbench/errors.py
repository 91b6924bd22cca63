"""Exception hierarchy shared by every module of the workbench."""


class LindbenchError(Exception):
    """Base class for all workbench errors."""


class SupportError(LindbenchError, ValueError):
    """Site supports overlap where they must be disjoint, or escape their container."""


class FactorizationError(LindbenchError, ValueError):
    """Matrix shape and site factorization disagree."""


class DomainError(LindbenchError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class NotAStateError(LindbenchError, ValueError):
    """Operator fails the positivity / normalization checks required of a state."""


class DimensionCapError(LindbenchError, ValueError):
    """Hilbert-space dimension exceeds the documented dense-numerics caps."""


class FixedPointError(LindbenchError):
    """Fixed point is not unique, or its kernel vector cannot be normalized."""


class PreconditionError(LindbenchError):
    """An analysis refused to run because its hypotheses do not hold."""


class DecompositionError(LindbenchError, ValueError):
    """Supplied local terms do not add up to the generator difference."""


class ConfigError(LindbenchError, ValueError):
    """Run configuration could not be parsed or validated."""
