"""Exception types raised across the package."""


class StreamLearnError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(StreamLearnError, ValueError):
    """An argument is malformed: wrong shape, non-finite, or out of range."""


class InvalidConfigError(StreamLearnError, ValueError):
    """A run or generator configuration is internally inconsistent."""


class InvalidPlanError(StreamLearnError, ValueError):
    """A split plan does not fit inside the available data."""


class DegenerateFeatureError(StreamLearnError, ValueError):
    """A non-intercept feature has zero standard deviation."""


class DegenerateTargetError(StreamLearnError, ValueError):
    """The target has zero total variation, so R^2 is undefined."""


class DegenerateLabelsError(StreamLearnError, ValueError):
    """Only one class is present where both are required."""


class SingularSystemError(StreamLearnError, ValueError):
    """An unregularized linear system is rank deficient."""


class InsufficientDataError(StreamLearnError, ValueError):
    """Too few observations to compute the requested quantity."""


class SchemaError(StreamLearnError, ValueError):
    """A CSV header does not match the declared schema."""


class ParseError(StreamLearnError, ValueError):
    """A CSV cell could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ExpertError(StreamLearnError, RuntimeError):
    """An expert's prediction function failed; carries the expert index."""

    def __init__(self, index, cause):
        super().__init__(f"expert {index} failed: {cause}")
        self.index = index
