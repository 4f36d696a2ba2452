"""Exception hierarchy.

Everything raised on bad input derives from :class:`PlcError`. The CLI maps
:class:`IoError` to exit code 2 and every other :class:`PlcError` to exit code 1.
"""

from __future__ import annotations


class PlcError(Exception):
    """Base class for all library errors."""


class IoError(PlcError):
    """Reading or writing a file failed."""


class DuplicateItem(PlcError):
    def __init__(self, index, where: str = ""):
        self.index = index
        super().__init__(f"duplicate item {index!r}{where}")


class ItemOutOfRange(PlcError):
    def __init__(self, index, n: int):
        self.index = index
        super().__init__(f"item {index!r} outside universe of size {n}")


class EmptyRanking(PlcError):
    pass


class ConsiderationSetTooSmall(PlcError):
    pass


class MissingConsiderationSet(PlcError):
    def __init__(self, position: int):
        self.position = position
        super().__init__(f"ranking {position} has no consideration set")


class ItemNeverConsidered(PlcError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"item {index} is in no consideration set")


class MaxIterationsExceeded(PlcError):
    """The optimizer ran out of iterations; ``best`` holds the last utilities."""

    def __init__(self, best, grad_sq: float, iterations: int):
        self.best = best
        self.grad_sq = grad_sq
        self.iterations = iterations
        super().__init__(
            f"no convergence after {iterations} iterations (|grad|^2={grad_sq:.3e})"
        )


class NormalizerZero(PlcError):
    pass


class RejectionCapExceeded(PlcError):
    pass


class UniverseTooLargeForExact(PlcError):
    pass


class NonPositiveUtility(PlcError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"utility of item {index} must be > 0")


class InfeasibleC(PlcError):
    pass


class AlphaNotGreaterThanOne(PlcError):
    pass


class BoundDegenerate(PlcError):
    pass


class DegenerateDenominator(PlcError):
    pass


class CycleDetected(PlcError):
    pass


class NonUniformK(PlcError):
    def __init__(self, line: int, expected: int, got: int):
        self.line = line
        super().__init__(f"line {line}: ranking length {got}, expected {expected}")


class UnknownSeparator(PlcError):
    pass


class TooFewRatings(PlcError):
    def __init__(self, respondent: str):
        self.respondent = respondent
        super().__init__(f"respondent {respondent!r} rated fewer than 2 items")


class EmptyDataset(PlcError):
    pass
