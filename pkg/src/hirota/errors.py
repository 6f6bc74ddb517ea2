"""Exception and warning types raised across the package."""


class HirotaError(Exception):
    """Base class for all package errors."""


class NumericalFailure(HirotaError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NonGenericPotential(HirotaError):
    """|s11| vanishes (numerically) at a real spectral point."""

    def __init__(self, z, s11):
        super().__init__(f"|s11({z:.6g})| = {abs(s11):.3e} is below threshold; potential is not generic")
        self.z = z
        self.s11 = s11


class InconsistentCount(HirotaError):
    pass


class Degeneracy(HirotaError):
    pass


class BoundStateNotFound(HirotaError, KeyError):
    pass


class DomainError(HirotaError, ValueError):
    pass


class NoStationaryPoint(DomainError):
    pass


class NLSDegenerate(DomainError):
    """beta == 0: theta' is linear and has the single root z = -x/(4 alpha t)."""


class TooCloseToContour(DomainError):
    pass


class InsufficientGrid(HirotaError):
    pass


class UnsupportedConfiguration(HirotaError, ValueError):
    pass


class FitFailure(HirotaError):
    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class BlowUp(HirotaError):
    def __init__(self, message, time, diagnostics=None):
        super().__init__(message)
        self.time = time
        self.diagnostics = dict(diagnostics or {})


class WrongExperiment(HirotaError):
    pass


class ConsistencyFailure(HirotaError):
    pass


class TruncationWarning(UserWarning):
    pass


class AmbiguousFitWarning(UserWarning):
    pass
