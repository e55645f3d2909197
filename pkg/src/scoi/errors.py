"""Shared exception types."""


class ValidationError(ValueError):
    """Bad user input: malformed file, out-of-range index, invalid config."""


class SizeCapError(ValidationError):
    """Instance exceeds a hard cap of a combinatorial (enumeration) routine."""


class InvariantViolation(RuntimeError):
    """An internal impossibility was observed; indicates a bug, not bad input."""
