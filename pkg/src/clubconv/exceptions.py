"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 1) and
numerical failures from :class:`NumericalError` (CLI exit code 2).
"""


class ClubConvergenceError(Exception):
    """Base class for every error raised by this package."""

    #: pipeline stage that raised, filled in by :func:`clubconv.io.run_study`
    stage = None


class InputError(ClubConvergenceError, ValueError):
    pass


class NumericalError(ClubConvergenceError, ArithmeticError):
    pass


class DimensionMismatch(InputError):
    pass


class NonPositiveValue(InputError):
    pass


class DuplicateUnit(InputError):
    pass


class UnknownPeriod(InputError):
    pass


class UnknownUnit(InputError):
    pass


class AlreadyLog(InputError):
    pass


class ParseError(InputError):
    pass


class RaggedPanel(InputError):
    pass


class DuplicateCell(InputError):
    pass


class OverlappingSubsets(InputError):
    pass


class WindowTooShort(InputError):
    pass


class LagTooLarge(InputError):
    pass


class ConstantRegressor(NumericalError):
    pass


class AllPeriodsDegenerate(NumericalError):
    pass


class ZeroCrossSectionMean(NumericalError):
    pass


class ZeroVariancePeriod(NumericalError):
    pass


class NonPositiveOutput(NumericalError):
    pass
