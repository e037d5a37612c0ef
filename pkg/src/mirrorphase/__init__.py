"""Acceleration-induced geometric phase of a two-level detector near mirrors."""

from .errors import (ConvergenceError, DomainError, GeometryError, InconsistencyError, MirrorPhaseError,
                     OracleError, SearchError)
from .kernel import DEFAULT_POLICY, RateCoefficients, SumDiagnostics, TruncationPolicy, rate_coefficients
from .phase import DetectorState, PhaseResult, berry_phase, density_matrix, phase_difference
from .units import CODATA, PAPER, LabSetup, PhysicalConstants, ReducedSetup, Scenario, reduce, unreduce

__version__ = "0.1.0"

__all__ = [
    "CODATA", "PAPER", "DEFAULT_POLICY", "ConvergenceError", "DetectorState", "DomainError", "GeometryError",
    "InconsistencyError", "LabSetup", "MirrorPhaseError", "OracleError", "PhaseResult", "PhysicalConstants",
    "RateCoefficients", "ReducedSetup", "Scenario", "SearchError", "SumDiagnostics", "TruncationPolicy",
    "berry_phase", "density_matrix", "phase_difference", "rate_coefficients", "reduce", "unreduce",
]
