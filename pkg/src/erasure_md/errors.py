"""Exception hierarchy shared by the codec, verifiers and CLI."""


class ErasureMDError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ErasureMDError, ValueError):
    """An argument lies outside the operation's domain."""


class UnsupportedDegreeError(DomainError):
    pass


class FieldTooSmallError(DomainError):
    pass


class DimensionError(DomainError):
    pass


class InsufficientSymbolsError(ErasureMDError):
    pass


class InconsistentCodewordError(ErasureMDError):
    pass


class ParameterInfeasibleError(DomainError):
    pass


class IntegrityError(ErasureMDError):
    """Received parity does not agree with the decoded message."""


class ContradictionError(ErasureMDError):
    """A reconstruction asserts a symbol that differs from the source."""


class TooLargeError(DomainError):
    """Configuration exceeds the desk-scale enumeration budget."""


class ConfigurationError(DomainError):
    pass


class InfeasibleDistortionError(DomainError):
    pass


class MalformedPacketError(ErasureMDError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
