"""Exception hierarchy shared across the package."""


class VipError(Exception):
    """Base class for all package-specific errors."""


# query-model
class IllegalRawValue(VipError):
    pass


class DuplicateQuery(VipError):
    pass


# differentiable core
class ShapeMismatch(VipError):
    pass


class NonPositiveTemperature(VipError):
    pass


class LabelOutOfRange(VipError):
    pass


class NonScalarLoss(VipError):
    pass


# networks
class AllQueriesMasked(VipError):
    pass


class CorruptCheckpoint(VipError):
    pass


class VersionMismatch(VipError):
    pass


# sampler / trainer
class MissingQuerier(VipError):
    pass


class EmptyDataset(VipError):
    pass


# pursuit / oracle
class QueriesExhausted(VipError):
    pass


class QueryAlreadyAsked(VipError):
    pass


class ZeroProbabilityHistory(VipError):
    pass


# data
class InvalidSpec(VipError):
    pass


class ParseError(VipError):
    def __init__(self, line, column, message):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DomainViolation(VipError):
    def __init__(self, line, column, message):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class InvalidFraction(VipError):
    pass


# metrics
class IncompleteCurve(VipError):
    pass


class QuerySetMismatch(VipError):
    pass
