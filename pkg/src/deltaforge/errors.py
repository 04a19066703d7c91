"""Exception hierarchy.

Every error raised on purpose by the package derives from ``DeltaforgeError``
so callers (the CLI in particular) can separate bad input from bugs.
"""


class DeltaforgeError(Exception):
    """Base class for all package errors."""


class DomainError(DeltaforgeError):
    """A chart point (or a stencil point around it) lies outside the domain box."""


class EvalError(DeltaforgeError):
    """An expression produced a non-finite or undefined intermediate value."""


class DimensionError(DeltaforgeError):
    pass


class KindError(DeltaforgeError):
    pass


class ParseError(DeltaforgeError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnboundIdentifier(ParseError):
    pass


class ArityError(ParseError):
    pass


class ConstraintError(DeltaforgeError):
    """Parameters or declared dimensions violate a family/spec constraint."""


class RangeError(DeltaforgeError):
    pass


class SingularPointError(DeltaforgeError):
    pass


class DegenerateMetricError(DeltaforgeError):
    def __init__(self, message, margin=None):
        super().__init__(message)
        # smallest pivot seen by the factorization; None when not applicable
        self.margin = margin


class SignatureError(DeltaforgeError):
    pass


class DegeneratePlaneError(DeltaforgeError):
    pass


class NonOrthonormalError(DeltaforgeError):
    pass


class RankError(DeltaforgeError):
    pass


class PartitionError(DeltaforgeError):
    pass


class InequalityViolation(DeltaforgeError):
    """delta_lower exceeded the upper bound c*H^2 + b*c; always an implementation bug."""


class UnsupportedError(DeltaforgeError):
    pass


class ConfigError(DeltaforgeError):
    pass


class IoError(DeltaforgeError, OSError):
    pass
