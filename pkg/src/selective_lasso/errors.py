"""Exception types shared across the package."""


class SelectiveLassoError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SelectiveLassoError, ValueError):
    """Invalid identifier, grid or parameter combination."""


class DegenerateDataError(SelectiveLassoError):
    """A simulated dataset kept producing constant columns."""

    def __init__(self, scenario_id, attempts):
        self.scenario_id = scenario_id
        self.attempts = attempts
        super().__init__(
            f"scenario {scenario_id!r}: constant predictor column in all {attempts} draws"
        )


class RankDeficientError(SelectiveLassoError, ValueError):
    """Design matrix (or a column subset of it) is not of full column rank."""

    def __init__(self, columns, message=None):
        self.columns = list(columns)
        super().__init__(message or f"rank-deficient design; collinear columns {self.columns}")


class InternalConsistencyError(SelectiveLassoError, RuntimeError):
    """The observed response is not inside its own selection event."""


class DegenerateIntervalError(SelectiveLassoError):
    """No grid value satisfied the pivot acceptance condition."""


class ResourceLimitError(SelectiveLassoError):
    """Requested enumeration is too large to run without an explicit cap."""
