class AxialError(Exception):
    """Base class for every error raised by the toolkit."""


class UnknownGenerator(AxialError):
    pass


class GroupMismatch(AxialError):
    pass


class CapacityExceeded(AxialError):
    pass


class EquivarianceViolation(AxialError):
    pass


class NotWild(AxialError):
    pass


class WindowExhausted(AxialError):
    """No m inside the scan window satisfies the coverage condition."""

    def __init__(self, message: str, witness: str | None = None):
        super().__init__(message)
        self.witness = witness


class SameCoset(AxialError):
    pass


class InsufficientCosets(AxialError):
    pass


class AxiomsFailed(AxialError):
    pass


class Disconnected(AxialError):
    pass


class PointMissing(AxialError):
    pass


class UnknownSuite(AxialError):
    pass


class ConfigError(AxialError):
    pass
