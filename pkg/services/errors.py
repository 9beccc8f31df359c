from typing import Any


class LatcircError(Exception):
    """Base class for every domain error raised by the services"""

    def __init__(self, message: str = "", **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def __str__(self) -> str:
        return f"{self.code}: {self.message}" if self.message else self.code


# lattice
class NotAPoset(LatcircError):
    pass


class NoLub(LatcircError):
    pass


class NoGlb(LatcircError):
    pass


class NoBottom(LatcircError):
    pass


class NoTop(LatcircError):
    pass


class NonConvergence(LatcircError):
    pass


class UnknownValue(LatcircError):
    pass


# signature
class ValueMapNotBijective(LatcircError):
    pass


class GateNotMonotone(LatcircError):
    pass


class GateNotBottomPreserving(LatcircError):
    pass


class IncompleteGateTable(LatcircError):
    pass


class UnknownSymbol(LatcircError):
    pass


# circuit
class ArityMismatch(LatcircError):
    pass


class CircuitSyntaxError(LatcircError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}", line=line, column=column)


class WidthMismatch(LatcircError):
    pass


class FileFormatError(LatcircError):
    pass


# semantics
class BudgetExceeded(LatcircError):
    pass


# rewrite
class PatternMismatch(LatcircError):
    pass


class NotCombinational(LatcircError):
    pass


class NotATrace(LatcircError):
    pass


class NotCombinationalCore(LatcircError):
    pass


# mealy / synthesis
class NotRealizable(LatcircError):
    pass


class NotFunctionallyComplete(LatcircError):
    pass


class DerivativeBudgetExceeded(LatcircError):
    pass


class NotAPartialOrder(LatcircError):
    pass


class SamplesNotMonotone(LatcircError):
    pass


class NotMonotone(LatcircError):
    """A stream function whose tables or residual machine are not monotone"""


class SynthesisError(LatcircError):
    pass
