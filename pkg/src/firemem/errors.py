"""Exception hierarchy shared by every firemem module."""


class FiremError(Exception):
    """Base class for all firemem errors."""


# network construction / state validation
class NetworkError(FiremError, ValueError):
    pass


class LengthMismatch(NetworkError):
    pass


class DelayOutOfRange(NetworkError):
    pass


class DanglingNodeId(NetworkError):
    pass


class DuplicateInput(NetworkError):
    pass


class DeltaOutOfRange(NetworkError):
    pass


class FormatError(FiremError, ValueError):
    """Malformed JSON document or schema violation."""


# dynamics
class BudgetExceeded(FiremError, RuntimeError):
    def __init__(self, budget, what="steps"):
        super().__init__(f"budget of {budget} {what} exceeded")
        self.budget = budget


# gadgets
class GadgetError(FiremError, ValueError):
    pass


class TauTooSmall(GadgetError):
    pass


class KTooSmall(GadgetError):
    pass


class NonDistinctPrimes(GadgetError):
    pass


class EmptyList(GadgetError):
    pass


# circuits
class CircuitError(FiremError, ValueError):
    pass


class CircuitSyntaxError(CircuitError):
    def __init__(self, lineno, msg):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class CycleDetected(CircuitError):
    pass


class UnknownIdentifier(CircuitError):
    pass


class NegationRejected(CircuitError):
    pass


class OutputArityMismatch(CircuitError):
    pass


# compiler
class CompileError(FiremError, ValueError):
    pass


class NotAlternating(CompileError):
    pass


class DegreeTooHigh(CompileError):
    pass


class IllFormed(CompileError):
    def __init__(self, block, pattern):
        super().__init__(f"block {block!r} holds {pattern!r}, which is not a wire code")
        self.block = block
        self.pattern = pattern


class CalibrationFailed(CompileError, RuntimeError):
    def __init__(self, budget):
        super().__init__(f"no simulation period p <= {budget} reproduces the circuit")
        self.budget = budget
