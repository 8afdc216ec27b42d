"""Exception hierarchy shared across the pipeline."""


class SieveError(Exception):
    """Base class for all pipeline errors."""


class ParseError(SieveError):
    """A line could not be parsed; carries file path and line number when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        if where:
            message = f"{where} {message}"
        super().__init__(message)


class SchemaError(ParseError):
    """A parsed record is missing required fields or has wrong field types."""


class SpanError(SieveError):
    """A span violates ordering, bounds, or UTF-8 boundary invariants."""


class FormatError(SieveError):
    """A binary file (Bloom filter, model) has a bad magic, version, or is truncated."""


class ConfigError(SieveError):
    """Invalid configuration or usage (maps to exit code 2)."""


class PolicyError(ConfigError):
    """A filter-policy expression failed to compile or references unknown attributes."""


class AlignmentError(SieveError):
    """Document shard and attribute sidecar disagree on ids or record counts."""


class TrainingError(ConfigError):
    """Classifier training received unusable data (empty or single-class)."""
