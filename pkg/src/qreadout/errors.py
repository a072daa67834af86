"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems are usage
errors (1), malformed data files are data errors (2), and non-finite
numerics are numeric failures (3).
"""


class ConfigError(ValueError):
    """Invalid configuration value or argument."""


class DataFormatError(Exception):
    """A data file could not be read."""


class VersionError(DataFormatError):
    """File carries an unsupported format version."""


class ChecksumError(DataFormatError):
    """Payload checksum does not match the header."""


class TruncationError(DataFormatError):
    """File ends before the declared payload is complete."""


class NumericError(RuntimeError):
    """Non-finite loss, collapsed mixture component, or similar."""
