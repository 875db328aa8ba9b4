"""Exception hierarchy for impostorkit."""


class ImpostorKitError(Exception):
    """Base class for every error raised by this package."""


# dataset / manifest
class ParseError(ImpostorKitError, ValueError):
    pass


class MissingField(ParseError):
    pass


class DuplicatePath(ImpostorKitError, ValueError):
    pass


class UnknownSubject(ImpostorKitError, KeyError):
    pass


class EmptyImpostorSet(ImpostorKitError, ValueError):
    pass


class EyesOutOfBounds(ImpostorKitError, ValueError):
    pass


# degrade
class BadLength(ImpostorKitError, ValueError):
    pass


class KernelTooWide(ImpostorKitError, ValueError):
    pass


class BadVariance(ImpostorKitError, ValueError):
    pass


class BadImage(ImpostorKitError, ValueError):
    pass


# matcher
class DegenerateEyes(ImpostorKitError, ValueError):
    pass


class FlatFace(ImpostorKitError, ValueError):
    """Aligned crop has no contrast, so it cannot be normalized to unit norm."""


class TooFewFaces(ImpostorKitError, ValueError):
    pass


class ZeroProjection(ImpostorKitError, ArithmeticError):
    pass


class NonFiniteScore(ParseError):
    pass


class ShapeMismatch(ParseError):
    pass


# stats
class TooFewValues(ImpostorKitError, ValueError):
    pass


class NonFiniteInput(ImpostorKitError, ValueError):
    pass


class LengthMismatch(ImpostorKitError, ValueError):
    pass


class ZeroVariance(ImpostorKitError, ArithmeticError):
    pass


class MissingBaseline(ImpostorKitError, KeyError):
    pass


class ZeroBaseline(ImpostorKitError, ZeroDivisionError):
    pass


# uniqueness
class DegenerateScores(ImpostorKitError, ArithmeticError):
    """All impostor scores are equal; the uniqueness ratio is 0/0."""


# pipeline
class ConfigError(ImpostorKitError, ValueError):
    pass


class MissingPoseImages(ImpostorKitError, LookupError):
    pass


class SubjectNotInBothSessions(ImpostorKitError, LookupError):
    pass
