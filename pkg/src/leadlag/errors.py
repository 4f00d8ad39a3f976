"""Exception hierarchy shared across the package."""


class LeadLagError(Exception):
    """Base class for all errors raised by this package."""


# --- data ingestion ---

class MalformedRow(LeadLagError):
    pass


class NonMonotonicTime(LeadLagError):
    pass


class EmptyFile(LeadLagError):
    pass


class GapTooLarge(LeadLagError):
    pass


class RangeUncovered(LeadLagError):
    pass


class DegenerateRange(LeadLagError):
    pass


class SeriesTooShort(LeadLagError):
    pass


# --- distance kernels ---

class EmptySequence(LeadLagError):
    pass


class TooLarge(LeadLagError):
    pass


class BadPartition(LeadLagError):
    pass


# --- models / training ---

class ShapeMismatch(LeadLagError):
    pass


class LengthMismatch(LeadLagError):
    pass


class NonFiniteActivation(LeadLagError):
    pass


class NonFiniteGradient(LeadLagError):
    pass


class Diverged(LeadLagError):
    pass


# --- experiments / orchestration ---

class TooFewWindows(LeadLagError):
    pass


class ConfigError(LeadLagError):
    pass


# Errors caused by bad inputs or configuration (CLI exit code 2).
VALIDATION_ERRORS = (
    MalformedRow,
    NonMonotonicTime,
    EmptyFile,
    GapTooLarge,
    RangeUncovered,
    DegenerateRange,
    SeriesTooShort,
    EmptySequence,
    TooLarge,
    BadPartition,
    ShapeMismatch,
    LengthMismatch,
    TooFewWindows,
    ConfigError,
)

# Numerical failures at runtime (CLI exit code 3).
NUMERICAL_ERRORS = (
    NonFiniteActivation,
    NonFiniteGradient,
    Diverged,
)
