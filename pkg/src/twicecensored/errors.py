"""Exception types shared across the package."""


class TwiceCensoredError(Exception):
    """Base class for all errors raised by this package."""


class NonzeroOverZero(TwiceCensoredError):
    """An atom with nonzero mass was divided by a zero denominator.

    The convention 0/0 = 0 only covers vanishing numerators; nonzero mass
    over a zero denominator has no meaningful value.
    """


class MassOutOfRange(TwiceCensoredError):
    """A product-limit atom fell outside [0, 1] beyond tolerance."""


class EmptyNeighborhood(TwiceCensoredError):
    """No observation lies inside the kernel support around the covariate
    point; the bandwidth is too small at this location."""


class SingularDesign(TwiceCensoredError):
    """The local-linear design is numerically singular at the covariate
    point (degenerate covariate configuration)."""


class LemmaViolation(TwiceCensoredError):
    """A rearranged hazard atom left [0, 1] beyond tolerance.

    The rearranged pipeline guarantees hazard atoms in [0, 1]; a violation
    signals a tie-handling or clamping bug, not bad data.
    """


class NonpositiveTime(TwiceCensoredError):
    """Time reversal requires strictly positive observation times."""


class NoValidTerms(TwiceCensoredError):
    """Every leave-one-out quantile was undefined for one bandwidth
    candidate; its loss is treated as +inf."""


class AllCandidatesInvalid(TwiceCensoredError):
    """No bandwidth candidate produced a finite cross-validation loss."""


class ParseError(TwiceCensoredError):
    """A data file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class SchemaError(TwiceCensoredError):
    """A data file violates the expected column schema or value domain."""


class ConfigError(TwiceCensoredError):
    """Invalid study or CLI configuration."""
