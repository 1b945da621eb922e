"""Exception types shared across the package.

The split mirrors the CLI exit-code contract: usage problems, bad data,
and external-service failures are reported differently.
"""


class PassageKitError(Exception):
    """Base class for all package errors."""


class UsageError(PassageKitError):
    """Invalid invocation: bad flag combination, out-of-range argument."""


class DataError(PassageKitError):
    """Malformed or contract-violating input data."""


class ExternalServiceError(PassageKitError):
    """A remote dependency (e.g. a scoring service) failed after retries."""
