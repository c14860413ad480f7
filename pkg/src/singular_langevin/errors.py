"""Exception hierarchy shared by all modules."""


class SingularLangevinError(Exception):
    pass


class SpecError(SingularLangevinError, ValueError):
    """A potential specification violates one of its structural constraints."""


class ExponentOrder(SpecError):
    pass


class LeadingSignError(SpecError):
    pass


class SingularSignError(SpecError):
    pass


class NotBoundedBelow(SpecError):
    pass


class DomainError(SingularLangevinError, ValueError):
    pass


class BelowMinimum(SingularLangevinError, ValueError):
    pass


class MultipleWells(SingularLangevinError, ValueError):
    pass


class QuadratureNoConverge(SingularLangevinError, RuntimeError):
    pass


class VerificationFailed(SingularLangevinError, RuntimeError):
    pass


class StepBreakdown(SingularLangevinError, RuntimeError):
    pass


class BoundaryGrowth(SingularLangevinError, RuntimeError):
    """Drift scan maximum still growing at the outermost energy shell."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class BlowupDetected(SingularLangevinError, FloatingPointError):
    pass


class StepFloorHit(SingularLangevinError, RuntimeError):
    pass


class InsufficientSamples(SingularLangevinError, ValueError):
    pass


class GeometryMismatch(SingularLangevinError, ValueError):
    pass


class WindowTooLong(SingularLangevinError, ValueError):
    pass


class ConfigParse(SingularLangevinError, ValueError):
    pass


class UnknownExperiment(SingularLangevinError, ValueError):
    pass


class OutputUnwritable(SingularLangevinError, OSError):
    pass
