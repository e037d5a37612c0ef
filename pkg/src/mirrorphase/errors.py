"""Exception hierarchy shared by all modules."""


class MirrorPhaseError(Exception):
    """Base class for every error raised by the package."""


class DomainError(MirrorPhaseError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class GeometryError(DomainError):
    """Detector/mirror placement is inconsistent with the scenario."""


class ConvergenceError(MirrorPhaseError, RuntimeError):
    """A series did not converge within the allowed number of terms.

    Attributes
    ----------
    diagnostics : SumDiagnostics or None
        Truncation state at the moment of failure.
    partial : float or None
        Partial sum reached before giving up.
    """

    def __init__(self, message, diagnostics=None, partial=None):
        super().__init__(message)
        self.diagnostics = diagnostics
        self.partial = partial


class InconsistencyError(MirrorPhaseError, ValueError):
    """Rate coefficients violate A >= |B|."""


class OracleError(MirrorPhaseError, RuntimeError):
    """Numerical quadrature inside an oracle failed to converge."""


class SearchError(MirrorPhaseError, RuntimeError):
    """A peak or feasibility search had nothing usable to work with."""
