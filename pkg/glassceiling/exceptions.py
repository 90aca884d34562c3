class GlassCeilingError(Exception):
    """Root of every error raised by the package."""


class DegenerateInput:
    """Marks errors meaning there is nothing measurable in the input."""


# Graph construction and ingestion

class SelfLoopRejected(GlassCeilingError, ValueError):
    pass


class UnknownNode(GlassCeilingError, KeyError):
    pass


class MissingAttribute(GlassCeilingError, KeyError):
    pass


class ParseError(GlassCeilingError, ValueError):
    def __init__(self, message: str, path: str = None, line: int = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class EmptyGraph(DegenerateInput, GlassCeilingError, ValueError):
    pass


# Distributions and measures

class EmptyJdam(DegenerateInput, GlassCeilingError, ValueError):
    pass


class DegenerateDistribution(DegenerateInput, GlassCeilingError, ValueError):
    pass


class NotNormalized(GlassCeilingError, ValueError):
    pass


class SumRuleViolation(GlassCeilingError, ValueError):
    pass


class InvalidOrder(GlassCeilingError, ValueError):
    pass


class DegenerateSeries(DegenerateInput, GlassCeilingError, ValueError):
    pass


# Generators

class InvalidConfig(GlassCeilingError, ValueError):
    pass


class ConnectivityRetriesExhausted(GlassCeilingError, RuntimeError):
    pass


class GenerationStalled(GlassCeilingError, RuntimeError):
    pass


# Optimizer

class NonFiniteTheta(GlassCeilingError, ValueError):
    pass


class EmptyGroup(GlassCeilingError, ValueError):
    pass


class NegativeCell(GlassCeilingError, ValueError):
    pass


class ExhaustedClasses(GlassCeilingError, RuntimeError):
    pass


# Experiments

class TooFewValidReplicates(DegenerateInput, GlassCeilingError, RuntimeError):
    pass
