"""Exception hierarchy shared by all modules."""


class ZetaVacError(Exception):
    """Base class for every error raised by the package."""


# series arithmetic
class SeriesError(ZetaVacError):
    pass


class BothLogBearing(SeriesError):
    pass


class ZeroLeadingCoefficient(SeriesError):
    pass


class LogBearingInput(SeriesError):
    pass


class DomainViolation(SeriesError):
    pass


class OrderNotRepresented(SeriesError):
    pass


class LogAtResidueOrder(SeriesError):
    pass


# spectral models
class NonPositiveLength(ZetaVacError, ValueError):
    pass


class InsufficientSpectrum(ZetaVacError):
    pass


# kernels
class KernelError(ZetaVacError):
    pass


class NonPositiveTime(KernelError, ValueError):
    pass


class TailBoundUnreachable(KernelError):
    pass


class UnsupportedDomain(KernelError):
    pass


class UnsupportedForSpectralBacking(KernelError):
    pass


class UnsupportedStencil(KernelError):
    pass


class SeriesDomainViolation(KernelError):
    pass


class KindMismatch(KernelError):
    pass


class UnsupportedDimension(KernelError, ValueError):
    pass


# continuation
class ContinuationError(ZetaVacError):
    pass


class PoleAtSigma(ContinuationError):
    def __init__(self, pole, message=None):
        self.pole = pole
        super().__init__(message or f"sigma hits a pole of the continued Mellin transform at {pole}")


class QuadratureNotConverged(ContinuationError):
    pass


class LimitNotConverged(ContinuationError):
    pass


class UnsupportedMode(ContinuationError):
    pass


# observables
class ObservableError(ZetaVacError):
    pass


class BoundaryPoint(ObservableError, ValueError):
    pass


class MissingKernelData(ObservableError):
    pass


class UnsupportedBoundaryCondition(ObservableError):
    pass


class PoleEncountered(ObservableError):
    def __init__(self, message, laurent=None):
        self.laurent = laurent
        super().__init__(message)


# cli
class ConfigError(ZetaVacError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
