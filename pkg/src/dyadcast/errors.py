"""Exception hierarchy."""


class DyadcastError(Exception):
    """Base class for all library errors."""


class ParseError(DyadcastError):
    """Malformed input file (carries the offending line number in the message)."""


class ValidationError(DyadcastError):
    """Input data violates a structural invariant."""


class DataError(DyadcastError):
    """Data is structurally valid but unusable (e.g. too much missingness)."""


class FitError(DyadcastError):
    """A model fit cannot proceed (e.g. one-class labels)."""


class TuningError(DyadcastError):
    """Tuning-parameter selection is impossible on the given data."""


class EvaluationError(DyadcastError):
    """A metric is undefined for the given score/label configuration."""


class SchemaError(DyadcastError):
    """Feature names or ordering do not match a model's training schema."""


class GenerationError(DyadcastError):
    """Synthetic data generation could not satisfy its constraints."""
