"""Exception types shared across the package."""


class ConformalKitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidLabelError(ConformalKitError):
    pass


class InvalidProbabilitiesError(ConformalKitError):
    pass


class EmptyCalibrationError(ConformalKitError):
    pass


class InvalidWeightError(ConformalKitError):
    pass


class DegenerateWeightsError(ConformalKitError):
    pass


class InsufficientDataError(ConformalKitError):
    pass


class ShapeError(ConformalKitError):
    pass


class InvalidKError(ConformalKitError):
    pass


class ConfigurationError(ConformalKitError):
    pass


class IncompleteRecordError(ConformalKitError):
    pass


class DegenerateLabelsError(ConformalKitError):
    pass


class UnsupportedScenarioError(ConformalKitError):
    pass


class RecordParseError(ConformalKitError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RecordValidationError(ConformalKitError):
    """A parsed record violates a dataset invariant; names record and field."""

    def __init__(self, message: str, record_id: str | None = None, field: str | None = None):
        self.record_id = record_id
        self.field = field
        prefix = ""
        if record_id is not None:
            prefix += f"record {record_id!r}"
        if field is not None:
            prefix += f" field {field!r}"
        super().__init__(f"{prefix}: {message}" if prefix else message)
