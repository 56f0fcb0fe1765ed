"""Semantic exception hierarchy shared by all mrinterp modules."""


class MrinterpError(Exception):
    """Base class for every error raised by this package."""


class ZeroMass(MrinterpError):
    """A density that must carry positive mass integrates to (numerically) zero."""


class NegativeValue(MrinterpError):
    """A density that must be nonnegative has a value below -tolerance."""


class WeightSum(MrinterpError):
    """Barycentric weights are negative or do not sum to one."""


class PointMass(MrinterpError):
    """A curve encodes an atom (delta mass) that cannot be represented as a density."""


class DomainMismatch(MrinterpError):
    """A target grid does not cover the support of the source function."""


class DegenerateDenominator(MrinterpError):
    """The sign-balancing coefficient has a vanishing denominator."""


class BothPartsZero(MrinterpError):
    """An interpolation operand is identically zero."""


class UnsupportedSignPattern(MrinterpError):
    """Sign pattern of a multi-function family has no defined interpolation rule."""


class MismatchedComponents(MrinterpError):
    """A derivative-split component is empty in one operand but not the other."""


class OutOfRange(MrinterpError):
    """Quantile sample locations fall outside the open interval (0, 1)."""


class OutOfDomain(MrinterpError):
    """A generated profile does not fit inside the requested grid."""


class UnsupportedIC(MrinterpError):
    """No closed-form solution is implemented for the requested initial condition."""


class AllIdentical(MrinterpError):
    """Every snapshot equals the reference; the snapshot matrix would be empty."""


class RankTooLarge(MrinterpError):
    """Requested reconstruction rank exceeds the number of available modes."""


class ConvergenceFailure(MrinterpError):
    """The Jacobi SVD sweep budget was exhausted before reaching tolerance."""


class GeometryMismatch(MrinterpError):
    """Sinogram geometry is incompatible with the requested image grid."""


class ShapeMismatch(MrinterpError):
    """A transform stage received a field of incompatible shape."""


class OddDimension(MrinterpError):
    """The Fourier sub-index permutation requires an even grid dimension."""


class ParseError(MrinterpError):
    """A serialized file is malformed; carries line/column context."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class InvariantViolation(MrinterpError):
    """A deserialized value violates its type invariants."""


class EmptyInput(MrinterpError):
    """An aggregation operation received no data."""
