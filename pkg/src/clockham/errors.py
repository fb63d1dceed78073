"""Exception hierarchy shared by all modules."""


class ClockhamError(Exception):
    """Base class for every error raised by this package."""


class InvalidMatrix(ClockhamError, ValueError):
    pass


class AsymmetricInput(InvalidMatrix):
    pass


class TooLarge(ClockhamError, ValueError):
    pass


class DegenerateVector(ClockhamError, ValueError):
    pass


class InvalidSize(ClockhamError, ValueError):
    pass


class DomainError(ClockhamError, ValueError):
    pass


class NearPole(DomainError):
    pass


class NoDecomposition(ClockhamError, ValueError):
    pass


class InvalidGate(ClockhamError, ValueError):
    pass


class ClockContractViolation(ClockhamError, ValueError):
    pass


class NotInitialized(ClockhamError, ValueError):
    pass


class NotAProjector(ClockhamError, ValueError):
    pass


class DecompositionFailed(ClockhamError, RuntimeError):
    pass


class InstanceContractViolation(ClockhamError, AssertionError):
    pass


class SpecFileError(ClockhamError, ValueError):
    """Schema violation in a circuit/clock spec file.

    ``path`` is the dotted field path of the offending entry.
    """

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
