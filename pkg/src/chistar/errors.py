"""Exception hierarchy shared by all modules.

The CLI prints ``type(exc).__name__`` on failure, so the class names are part
of the user-facing surface.
"""


class ChiStarError(Exception):
    """Base class for all library errors."""


class NotInSubfield(ChiStarError):
    pass


class NonUnitLeading(ChiStarError):
    pass


class OutOfTruncation(ChiStarError):
    pass


class NotPrimitive(ChiStarError):
    pass


class PrecisionLoss(ChiStarError):
    pass


class DomainError(ChiStarError):
    pass


class TruncationTooSmall(ChiStarError):
    pass


class CancellationFailure(ChiStarError):
    pass


class NoSolution(ChiStarError):
    pass


class ParseError(ChiStarError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidDiscriminant(ChiStarError):
    pass


class LevelUnavailable(ChiStarError):
    pass


class FormulaPole(ChiStarError):
    pass


class SmallDenominator(ChiStarError):
    pass


class ReconstructionFailed(ChiStarError):
    pass
