"""Exception types shared across the toolkit."""


class CardioLearnError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(CardioLearnError):
    """Column set or schema fingerprint does not match the expected schema."""


class ParseError(CardioLearnError):
    """A cell could not be parsed; message names the row and column."""


class EmptyInputError(CardioLearnError):
    """Input file contains a header but no data rows."""


class InsufficientDataError(CardioLearnError):
    """Too few rows for the requested operation."""


class EncodingError(CardioLearnError):
    """A nominal value outside its domain was met while encoding."""


class DegenerateFeatureError(CardioLearnError):
    """A feature column has zero variance where variance is required."""


class StratificationError(CardioLearnError):
    """Class counts cannot support the requested stratified partition."""


class ShapeError(CardioLearnError):
    """Array dimensions do not match the fitted or expected layout."""


class DomainError(CardioLearnError):
    """A value falls outside the permitted domain (e.g. non-binary label)."""


class UndefinedMetricError(CardioLearnError):
    """Metric is undefined for the given input (e.g. AUC with one class)."""


class ConfigurationError(CardioLearnError):
    """Invalid hyperparameter, grid, or run configuration."""


class TrainingError(CardioLearnError):
    """Training could not produce a model (e.g. single-class targets)."""


class DivergenceError(TrainingError):
    """Optimization produced a non-finite loss; message names the step."""


class InputError(CardioLearnError):
    """A prediction-time record violates the feature schema."""


class PersistenceError(CardioLearnError):
    """Base class for model artifact encode/decode failures."""


class NotAModelError(PersistenceError):
    """File does not start with the model artifact magic string."""


class TruncatedFileError(PersistenceError):
    """Artifact is empty or ends before the checksum line."""


class ChecksumError(PersistenceError):
    """Artifact checksum does not match its content."""


class VersionError(PersistenceError):
    """Artifact format version is newer than this toolkit understands."""
