"""Domain errors raised by fundisc.

Every error derives from :class:`FundiscError`; the CLI maps these to exit
code 1 and prints the class name on stderr.
"""


class FundiscError(ValueError):
    """Base class for domain errors."""


class NotHalfIntegral(FundiscError):
    pass


class NotPositiveDefinite(FundiscError):
    pass


class DimensionMismatch(FundiscError):
    pass


class ZeroInput(FundiscError):
    pass


class BadDiscriminant(FundiscError):
    """Discriminant is even or not square-free where odd square-free is required."""


class PrecisionTooLow(FundiscError):
    pass


class ModuliNotCoprime(FundiscError):
    pass


class LocalDetNotOne(FundiscError):
    pass


class BadModulus(FundiscError):
    pass


class MixedConductors(FundiscError):
    pass


class BadFactorization(FundiscError):
    pass


class BadWeight(FundiscError):
    pass


class FractionalExponents(FundiscError):
    pass


class NonIntegralExponents(FundiscError):
    pass


class SymmetryViolation(FundiscError):
    """Coefficient table is not invariant under the index-m symmetries."""


class IndexMismatch(FundiscError):
    pass


class FractionalResult(FundiscError):
    pass


class NoPrimitiveComponent(FundiscError):
    pass


class SearchTooLarge(FundiscError):
    """An exhaustive enumeration would exceed the configured budget."""
