"""Exception hierarchy shared by every module."""


class ErgolabError(Exception):
    """Base class for all library errors."""


class DomainError(ErgolabError, ValueError):
    """An argument lies outside the domain of an operation."""


class ClassMismatchError(ErgolabError, TypeError):
    """Observables of different classes, or an observable the system cannot act on."""


class UnsupportedError(ErgolabError):
    """The requested operation is not available for this system."""


class HorizonError(ErgolabError):
    """An iterate exceeds the horizon of a finite rank-one stage."""


class CostGuardError(ErgolabError):
    """A computation would exceed a configured size or cost cap."""


class VerificationError(ErgolabError):
    """An internal self-check (scan, oracle comparison) failed."""
