"""Exception types shared across the package."""


class LongResolventError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(LongResolventError):
    pass


class NotHermitian(LongResolventError):
    pass


class NotPSD(LongResolventError):
    pass


class NotUnitary(LongResolventError):
    pass


class GramMismatch(LongResolventError):
    pass


class HermitianInfeasible(LongResolventError):
    pass


class RealInfeasible(LongResolventError):
    pass


class SpanNotSaturated(LongResolventError):
    pass


class EvaluationSingular(LongResolventError):
    """Evaluation hit a pole / singular inner block.  Carries the point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ResolventSingular(EvaluationSingular):
    pass


class InnerBlockSingular(EvaluationSingular):
    pass


class CayleySingular(EvaluationSingular):
    def __init__(self, message, point=None, coordinate=None):
        super().__init__(message, point)
        self.coordinate = coordinate


class SingularShift(EvaluationSingular):
    def __init__(self, message, point=None, condition=None):
        super().__init__(message, point)
        self.condition = condition


class NotStrictContraction(LongResolventError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotStrictlyAccretive(LongResolventError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class CommutationViolated(LongResolventError):
    pass


class KernelNotConstant(LongResolventError):
    pass


class NonzeroD(LongResolventError):
    pass


class NotUnitaryW(LongResolventError):
    pass


class EigenvalueOneResidue(LongResolventError):
    pass


class NotReal(LongResolventError):
    pass


class InsufficientSamples(LongResolventError):
    pass


class ArtifactError(LongResolventError):
    """Malformed or invalid artifact file."""
