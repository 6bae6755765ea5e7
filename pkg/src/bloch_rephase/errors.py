"""Exception hierarchy shared by all modules."""


class BlochRephaseError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BlochRephaseError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateControlError(DomainError):
    """Control vector vanishes (zero Rabi frequency on resonance)."""


class ValidityError(BlochRephaseError):
    """An ARP precondition (far-off-resonance edges) is violated.

    ``ratio`` carries the offending |Omega/(Delta - phidot)| value and
    ``edge`` names the pulse edge ("start" or "end").
    """

    def __init__(self, message, ratio=float("nan"), edge=""):
        super().__init__(message)
        self.ratio = ratio
        self.edge = edge


class ShapeError(BlochRephaseError):
    """Sequence does not have the canonical delay-ARP-delay-ARP-delay shape."""


class ConditionError(DomainError):
    """A scan parameter would violate a sequence condition (e.g. tau3 < 0)."""


class StiffnessError(BlochRephaseError, RuntimeError):
    """Adaptive integrator could not make progress (step underflow)."""


class SequenceSyntaxError(BlochRephaseError, ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SequenceSemanticError(BlochRephaseError, ValueError):
    def __init__(self, message, index, line=None):
        where = f"element {index}" + (f" (line {line})" if line is not None else "")
        super().__init__(f"{where}: {message}")
        self.index = index
        self.line = line
