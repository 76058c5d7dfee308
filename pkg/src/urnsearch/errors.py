"""Exception types shared across the package."""


class UrnSearchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidProblemError(UrnSearchError, ValueError):
    """A problem description violates a structural constraint."""


class InvalidPolicyError(UrnSearchError, ValueError):
    """A policy is malformed or does not match the problem's urns."""


class ExhaustedUrnError(UrnSearchError, ValueError):
    """A draw was requested from an urn with no marbles remaining."""


class ImpossibleStateError(UrnSearchError):
    """A state with zero survival probability was conditioned on."""


class EnumerationCapError(UrnSearchError):
    """An enumeration would exceed the configured size cap."""

    def __init__(self, message: str, required: int, cap: int) -> None:
        super().__init__(message)
        self.required = required
        self.cap = cap
