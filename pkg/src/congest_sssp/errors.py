"""Exception types raised across the package."""


class SimulationError(RuntimeError):
    pass


class CapacityViolation(SimulationError):
    """A node tried to push two messages through one channel in one round."""


class PayloadViolation(SimulationError):
    """A message word is outside the allowed range or the payload is too long."""


class RoundCapExceeded(SimulationError):
    pass


class InvalidTopology(ValueError):
    pass


class InfeasibleSpec(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class RangeError(ValueError):
    pass


class ParamError(ValueError):
    pass


class NegativeWeight(ArithmeticError):
    """A reweighted edge came out negative, so the previous distances were not exact."""


class ConsistencyError(AssertionError):
    pass


class PromiseViolation(RuntimeError):
    """The caller's radius promise does not hold for the given instance."""


class RecursionDepthExceeded(RuntimeError):
    pass


class InsufficientData(ValueError):
    pass
