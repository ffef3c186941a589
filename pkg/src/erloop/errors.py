"""Exception hierarchy shared across the package."""


class ErloopError(Exception):
    """Base class for all errors raised by this package."""


class DatasetFormatError(ErloopError):
    """A dataset directory or file does not follow the expected layout."""


class IntegrityError(ErloopError):
    """Loaded data violates a structural invariant (e.g. duplicate ids)."""


class ParseError(ErloopError):
    """A field value could not be parsed (e.g. a label outside {0, 1})."""


class ConfigError(ErloopError):
    """A configuration value is invalid or inconsistent."""


class InsufficientLabelsError(ErloopError):
    """An operation requires labeled examples that are not available."""


class NumericError(ErloopError):
    """A numeric precondition failed (e.g. non-finite gradients)."""


class CheckpointError(ErloopError):
    """A binary checkpoint or embedding file is malformed."""


class UndefinedMetricError(ErloopError):
    """A metric is undefined for the given inputs (e.g. empty gold set)."""


class QueueError(ErloopError):
    """A label was submitted for a pair that is not awaiting one."""
