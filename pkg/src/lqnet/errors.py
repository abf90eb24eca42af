"""Exception types shared across the package."""


class LqnetError(Exception):
    """Base class for all domain errors raised by this package."""


class DimensionMismatchError(LqnetError):
    """Inputs that should share a group size N do not."""


class NonContractionError(LqnetError):
    """Best-response iteration failed to converge within its budget."""


class OrientationBudgetError(LqnetError):
    """Sponsorship-orientation search space exceeds the enumeration budget."""


class RankDeficientDataError(LqnetError):
    """Regression data too degenerate to identify the model coefficients."""


class SchemaVersionError(LqnetError):
    """Persisted record carries a format version this code does not read."""


class UnknownTreatmentError(LqnetError):
    """Treatment name not found among the bundled presets."""


class ConfigError(LqnetError):
    """Scenario/config file is malformed; message carries the field path."""
