"""Exception hierarchy shared by all modules."""


class BSError(Exception):
    """Base class for every error raised by this package."""


class NotHyperbolic(BSError):
    pass


class FixesOrigin(BSError):
    pass


class CoincidentPoints(BSError):
    pass


class InvalidOrder(BSError, ValueError):
    pass


class SignatureRejected(BSError):
    """Raised when a pipeline is asked to run on a signature outside the admissible set."""

    def __init__(self, verdict, signature):
        super().__init__(f"signature {signature} rejected: {verdict}")
        self.verdict = verdict
        self.signature = signature


class PlacementFailure(BSError):
    pass


class FanCountMismatch(BSError):
    pass


class GluingFailure(BSError):
    pass


class IndexOutOfRange(BSError, IndexError):
    pass


class AlphaOutsideOverlap(BSError, ValueError):
    pass


class PrecisionExhausted(BSError):
    pass


class Unresolved(BSError):
    pass


class NoFixedPointInOverlap(BSError):
    pass


class AmbiguousAlpha(BSError):
    """Both fixed points of a word lie in overlap intervals; caller must select one."""

    def __init__(self, candidates):
        super().__init__(f"both fixed points lie in overlaps: {candidates}")
        self.candidates = candidates


class NotMarkovCell(BSError):
    pass


class ConsistencyViolation(BSError):
    """Two routes that must agree did not (e.g. predicate vs empirical surjectivity)."""
