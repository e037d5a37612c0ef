"""Geometric phase of the detector and its closed-form open-system evolution.

The detector Hamiltonian is ``(hbar omega0 / 2) sigma_3`` and it couples to
the field through ``sigma_2``; both choices are fixed. The initial state is
``cos(theta/2)|+> + sin(theta/2)|->``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernel
from .errors import DomainError
from .kernel import DEFAULT_POLICY, RateCoefficients, TruncationPolicy
from .units import ReducedSetup

_TWO_PI2 = 2.0 * math.pi**2


def _trig(theta: float):
    # sin via the nearer endpoint so that theta = pi gives exactly 0
    s = math.sin(min(theta, math.pi - theta))
    return s, math.cos(theta)


@dataclass(frozen=True)
class DetectorState:
    """Initial Bloch angle and effective precession frequency.

    Parameters
    ----------
    theta : float
        Polar angle of the initial state, in [0, pi].
    omega0 : float
        Bare gap frequency (rad/s).
    lamb_shift : float
        Frequency shift added to ``omega0``; enters only the coherence phase.
    """

    theta: float
    omega0: float = 1.0
    lamb_shift: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError("theta must lie in [0, pi]")
        if not self.Omega > 0:
            raise DomainError("effective frequency must be > 0")

    @property
    def Omega(self) -> float:
        return self.omega0 + self.lamb_shift


@dataclass(frozen=True)
class PhaseResult:
    phi_accel: float
    phi_inertial: float
    delta_phi: float
    rates: RateCoefficients
    setup: Optional[ReducedSetup] = None

    @property
    def delta_phi_abs(self) -> float:
        return abs(self.delta_phi)


@dataclass(frozen=True)
class DensityMatrixSnapshot:
    tau: float
    rho: np.ndarray

    @property
    def coherence(self) -> float:
        return float(abs(self.rho[0, 1]))


def berry_phase(A: float, B: float, theta: float, omega0: float = 1.0) -> float:
    """Pancharatnam-Berry phase ``-pi(1 - cos t) - (2 pi^2 sin^2 t / w0)(2B + A cos t)``.

    ``A`` and ``B`` share units with ``omega0``; pass dimensionless rates
    together with ``omega0 = 1``.
    """
    if not omega0 > 0:
        raise DomainError("omega0 must be > 0")
    s, c = _trig(theta)
    return -2.0 * math.pi * math.sin(0.5 * theta) ** 2 - _TWO_PI2 * s * s / omega0 * (2.0 * B + A * c)


def _delta_core(dA, dB, theta):
    s, c = _trig(theta)
    return -_TWO_PI2 * s * s * (2.0 * dB + dA * c)


def phase_difference(setup: ReducedSetup, policy: TruncationPolicy = DEFAULT_POLICY) -> PhaseResult:
    """Phases of the accelerated detector and its inertial twin, plus their difference.

    The difference is formed from ``B - B0`` and ``A - A0`` directly, so the
    geometric ``-pi(1 - cos theta)`` piece never has to cancel numerically.
    It is exactly proportional to ``setup.kappa``.
    """
    rates = kernel.rate_coefficients(setup, policy)
    k = setup.kappa
    phi_a = berry_phase(k * rates.A, k * rates.B, setup.theta)
    phi_i = berry_phase(k * rates.A0, k * rates.B0, setup.theta)
    delta = k * _delta_core(rates.dA, rates.dB, setup.theta)
    return PhaseResult(phi_accel=phi_a, phi_inertial=phi_i, delta_phi=delta, rates=rates, setup=setup)


def delta_phi_closed(scenario, alpha, zeta, theta: float = math.pi / 4, kappa: float = 1.0):
    """Vectorised phase difference for free space or a single mirror.

    Returns a dict of arrays with keys ``delta_phi, A, B, A0, B0``.
    """
    s, s0 = kernel.closed_form_sums(scenario, alpha, zeta)
    cm1 = kernel.coth_minus_one(np.broadcast_to(np.asarray(alpha, dtype=float), s.shape))
    b = s * kernel._INV_16PI
    a = b + cm1 * b
    b0 = s0 * kernel._INV_16PI
    d_b = b - b0
    d_a = d_b + cm1 * b
    return {"delta_phi": kappa * _delta_core(d_a, d_b, theta), "A": a, "B": b, "A0": b0, "B0": b0}


def _physical_rates(coeffs: RateCoefficients, omega0: float, kappa: float):
    scale = kappa * omega0
    return scale * coeffs.A, scale * coeffs.B


def density_matrix(state: DetectorState, coeffs: RateCoefficients, tau: float,
                   kappa: float = 1.0) -> DensityMatrixSnapshot:
    """Reduced density matrix at proper time ``tau`` (seconds, or ``1/omega0`` units).

    Populations relax as
    ``f = e^{-4A tau} cos^2(theta/2) + (A - B)/(2A) (1 - e^{-4A tau})`` and the
    coherence decays at rate ``2A`` while precessing at ``Omega``. ``A = 0``
    is the unitary limit.
    """
    if tau < 0:
        raise DomainError("tau must be >= 0")
    a, _ = _physical_rates(coeffs, state.omega0, kappa)
    theta = state.theta
    c2 = math.cos(0.5 * theta) ** 2
    if a == 0.0:
        f = c2
    else:
        decay = math.exp(-4.0 * a * tau)
        f = decay * c2 + steady_state_population(coeffs) * (-math.expm1(-4.0 * a * tau))
    off = 0.5 * math.sin(theta) * math.exp(-2.0 * a * tau)
    ph = state.Omega * tau
    r12 = off * complex(math.cos(ph), -math.sin(ph))
    rho = np.array([[f, r12], [r12.conjugate(), 1.0 - f]], dtype=complex)
    return DensityMatrixSnapshot(tau=tau, rho=rho)


def coherence_amplitude(state: DetectorState, coeffs: RateCoefficients, tau: float, kappa: float = 1.0) -> float:
    """``|rho_12| = sin(theta) e^{-2 A tau} / 2``."""
    if tau < 0:
        raise DomainError("tau must be >= 0")
    a, _ = _physical_rates(coeffs, state.omega0, kappa)
    return 0.5 * math.sin(state.theta) * math.exp(-2.0 * a * tau)


def steady_state_population(coeffs: RateCoefficients) -> float:
    """``f(tau -> inf) = (A - B) / 2A``; a Fermi-Dirac occupation at the Unruh temperature."""
    if coeffs.A == 0.0:
        raise DomainError("steady state undefined for A = 0")
    if coeffs.coth_minus_one is not None:
        return coeffs.coth_minus_one * coeffs.B / (2.0 * coeffs.A)
    return (coeffs.A - coeffs.B) / (2.0 * coeffs.A)
