"""Exception types shared across the package."""


class RainbowSTSError(Exception):
    """Base class for every error raised by this package."""


class DivisibilityViolation(RainbowSTSError):
    """Vertex count or graph fails a K_3 divisibility requirement."""


class SpecViolation(RainbowSTSError):
    """Parameters of an extremal construction are invalid."""


class SearchTimeout(RainbowSTSError):
    """A search budget (nodes or seconds) was exhausted."""


class InfeasibleColorCount(RainbowSTSError):
    """Fewer colors than triples required by a rainbow decomposition."""


class EmptyHypergraph(RainbowSTSError):
    pass


class NegativeWeight(RainbowSTSError):
    def __init__(self, triple, value):
        super().__init__(f"weight of {triple} would become {value}")
        self.triple = triple
        self.value = value


class OracleInfeasible(RainbowSTSError):
    def __init__(self, round_no, certificate=None):
        super().__init__(f"no perfect fractional matching at round {round_no}")
        self.round_no = round_no
        self.certificate = certificate


class OddDegree(RainbowSTSError):
    pass


class HomomorphismViolation(RainbowSTSError):
    pass


class NotEdgeBijective(RainbowSTSError):
    pass


class NotDivisible(RainbowSTSError):
    pass


class RootMismatch(RainbowSTSError):
    pass


class SearchExhausted(RainbowSTSError):
    pass


class RetriesExhausted(RainbowSTSError):
    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail


class Stuck(RainbowSTSError):
    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail


class SizeMismatch(RainbowSTSError):
    pass


class StageFailure(RainbowSTSError):
    def __init__(self, stage, reason):
        super().__init__(f"{stage}: {reason}")
        self.stage = stage
        self.reason = reason
