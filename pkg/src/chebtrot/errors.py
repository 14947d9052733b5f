"""Exception hierarchy shared by every module."""


class ChebtrotError(Exception):
    """Base class for all library errors."""


class InputError(ChebtrotError, ValueError):
    """An argument violates a documented precondition."""


class CapabilityError(ChebtrotError):
    """The request is valid but exceeds what the dense implementation supports."""


class DomainError(ChebtrotError, ValueError):
    """A numeric formula was evaluated outside its domain of validity."""


class BranchCutError(DomainError):
    """An eigenphase sits on (or too close to) the principal-log branch cut."""


class LevelCrossingError(DomainError):
    """The tracked eigenstate changes identity between interpolation nodes."""


class WindowError(DomainError):
    """The scaled spectrum does not fit inside the Fourier window."""
