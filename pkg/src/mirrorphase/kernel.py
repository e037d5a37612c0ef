"""Lindblad coefficients A and B from the image sum over mirror reflections.

Everything is dimensionless: distances are ``uhat = omega0 u / c``, the
acceleration is ``alpha = a / (omega0 c)`` and rates are quoted in units of
``kappa * omega0``. With ``K(uhat) = alpha * J(uhat)`` the coefficients are::

    B / (kappa omega0) = (1 / 16 pi) * sum_n [K(|lam n|) - K(|lam n + zeta|)]
    A / (kappa omega0) = coth(pi / alpha) * B / (kappa omega0)

and the inertial values follow from ``alpha * J(uhat) -> sin(2 uhat)/uhat``.
The double-mirror sum is taken over a symmetric window ``|n| <= N`` with the
``n`` and ``-n`` images combined, so a single term is the second difference
``2 K(lam n) - K(lam n + zeta) - K(lam n - zeta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import ConvergenceError, DomainError, InconsistencyError
from .units import ReducedSetup, Scenario

_CHUNK = 1 << 17
_INV_16PI = 1.0 / (16.0 * math.pi)


@dataclass(frozen=True)
class TruncationPolicy:
    """How many image pairs to keep in the double-mirror sum.

    ``mode="fixed"`` sums exactly ``max_n`` pairs. ``mode="adaptive"`` grows
    the window in blocks of ``block_size`` until both the last block and the
    estimated remainder fall below ``rel_tol * |S|``; it gives up with
    :class:`ConvergenceError` at ``hard_cap``.
    """

    mode: str = "adaptive"
    max_n: int = 10**6
    rel_tol: float = 1e-8
    block_size: int = 10**4
    hard_cap: int = 2 * 10**6

    def __post_init__(self):
        if self.mode not in ("fixed", "adaptive"):
            raise DomainError(f"unknown truncation mode {self.mode!r}")
        if not (isinstance(self.max_n, (int, np.integer)) and self.max_n >= 1):
            raise DomainError("max_n must be a positive integer")
        if not (isinstance(self.hard_cap, (int, np.integer)) and self.hard_cap >= 1):
            raise DomainError("hard_cap must be a positive integer")
        if self.mode == "fixed" and self.max_n > self.hard_cap:
            raise DomainError("max_n exceeds hard_cap")
        if not 0.0 < self.rel_tol <= 1e-2:
            raise DomainError("rel_tol must lie in (0, 1e-2]")
        if self.block_size < 1000:
            raise DomainError("block_size must be >= 1000")

    @classmethod
    def fixed(cls, max_n: int, hard_cap: Optional[int] = None, rel_tol: float = 1e-8) -> "TruncationPolicy":
        max_n = int(max_n)
        cap = max(2 * 10**6, max_n) if hard_cap is None else int(hard_cap)
        return cls(mode="fixed", max_n=max_n, hard_cap=cap, rel_tol=rel_tol)

    @classmethod
    def adaptive(cls, rel_tol: float = 1e-8, block_size: int = 10**4, hard_cap: int = 2 * 10**6) -> "TruncationPolicy":
        return cls(mode="adaptive", rel_tol=rel_tol, block_size=int(block_size), hard_cap=int(hard_cap),
                   max_n=min(10**6, int(hard_cap)))


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class SumDiagnostics:
    """State of a truncated image sum.

    ``tail_estimate`` is a heuristic for the magnitude of everything beyond
    ``n_used``; it is not a rigorous bound.
    """

    n_used: int = 0
    tail_estimate: float = 0.0
    converged: bool = True


@dataclass(frozen=True)
class RateCoefficients:
    """A, B and their inertial limits, all in units of ``kappa * omega0``."""

    A: float
    B: float
    A0: float
    B0: float
    alpha: Optional[float] = None
    coth_minus_one: Optional[float] = None
    diagnostics: SumDiagnostics = field(default_factory=SumDiagnostics)

    @property
    def dA(self) -> float:
        """``A - A0`` without cancelling the thermal excess."""
        if self.coth_minus_one is None:
            return self.A - self.A0
        return (self.B - self.B0) + self.coth_minus_one * self.B

    @property
    def dB(self) -> float:
        return self.B - self.B0


# ---------------------------------------------------------------------------
# kernels


def coth_minus_one(alpha):
    """``coth(pi/alpha) - 1 = 2/(e^{2 pi/alpha} - 1)`` without cancellation."""
    with np.errstate(over="ignore"):
        out = 2.0 / np.expm1(2.0 * np.pi / np.asarray(alpha, dtype=float))
    return out if out.ndim else float(out)


def scaled_kernel(uhat, alpha: float):
    """``alpha * J(uhat)`` with its limit 2 at ``uhat = 0``; even in ``uhat``."""
    if not alpha > 0:
        raise DomainError("alpha must be > 0")
    u = np.abs(np.asarray(uhat, dtype=float))
    x = alpha * u
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin((2.0 / alpha) * np.arcsinh(x)) / (u * np.hypot(1.0, x))
    out = np.where(u == 0.0, 2.0, out)
    return out if out.ndim else float(out)


def j_kernel(uhat, alpha: float):
    """Image kernel ``J = sin((2/alpha) asinh(alpha u)) / (alpha u sqrt(1 + alpha^2 u^2))``.

    ``J(0) = 2/alpha``. Accepts scalars or arrays; ``uhat`` is the distance in
    units of ``c / omega0``.
    """
    return scaled_kernel(uhat, alpha) / alpha


def inertial_kernel(uhat):
    """``sin(2 u)/u``, the ``alpha -> 0`` limit of ``alpha * J``."""
    u = np.abs(np.asarray(uhat, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin(2.0 * u) / u
    out = np.where(u == 0.0, 2.0, out)
    return out if out.ndim else float(out)


def sawtooth(x: float) -> float:
    """Closed form of ``sum_{n>=1} sin(n x)/n``: ``(pi - x)/2`` on ``(0, 2 pi)``."""
    r = math.fmod(x, 2.0 * math.pi)
    if r < 0:
        r += 2.0 * math.pi
    if r == 0.0:
        return 0.0
    return 0.5 * (math.pi - r)


# ---------------------------------------------------------------------------
# accelerated image sum


def pair_terms(n: np.ndarray, alpha: float, lam: float, zeta: float) -> np.ndarray:
    """Combined contribution of images ``n`` and ``-n`` (``n >= 1``)."""
    ln = lam * n
    return 2.0 * scaled_kernel(ln, alpha) - scaled_kernel(ln + zeta, alpha) - scaled_kernel(ln - zeta, alpha)


def inertial_pair_terms(n: np.ndarray, lam: float, zeta: float) -> np.ndarray:
    ln = lam * n
    return 2.0 * inertial_kernel(ln) - inertial_kernel(ln + zeta) - inertial_kernel(ln - zeta)


def _block_sum(fn, n0: int, n1: int) -> Tuple[float, float]:
    """fsum of ``fn(n)`` for ``n0 < n <= n1`` in fixed-size chunks, plus the last term."""
    parts = []
    last = 0.0
    start = n0 + 1
    while start <= n1:
        stop = min(start + _CHUNK - 1, n1)
        t = fn(np.arange(start, stop + 1, dtype=float))
        parts.append(math.fsum(t))
        last = float(t[-1])
        start = stop + 1
    return math.fsum(parts), last


def tail_estimate(alpha: float, lam: float, zeta: float, n: int, last_term: float) -> float:
    """Heuristic size of the omitted pairs beyond ``n``.

    Sampled at integer ``n`` the kernel phase advances by
    ``2 lam / sqrt(1 + (alpha lam n)^2)`` per step. Each time that step
    passes a multiple ``2 pi k`` the terms add coherently; the contribution of
    every such point still ahead of ``n`` is estimated by stationary phase.
    The remaining smooth part is bounded in summation-by-parts fashion by
    ``|last term| / |2 sin(step/2)|``.
    """
    x_n = alpha * lam * n
    step = 2.0 * lam / math.hypot(1.0, x_n)
    kmax = int(step / (2.0 * math.pi))
    res = 0.0
    if kmax >= 1:
        k = np.arange(1, kmax + 1, dtype=float)
        q = lam / (math.pi * k)
        xk = np.sqrt(np.maximum(q * q - 1.0, 1e-300))
        amp = 2.0 * np.abs(1.0 - np.cos(2.0 * zeta / q)) * alpha / (xk * q)
        curvature = 2.0 * alpha * lam * lam * xk / q**3
        res = float(np.sum(amp * np.sqrt(2.0 * math.pi / curvature)))
    smooth = abs(last_term) / max(abs(2.0 * math.sin(0.5 * step)), 1.0 / max(n, 1))
    return res + smooth


def _double_scaled_sum(alpha: float, lam: float, zeta: float, policy: TruncationPolicy):
    head = 2.0 - scaled_kernel(zeta, alpha)
    fn = lambda n: pair_terms(n, alpha, lam, zeta)  # noqa: E731
    if policy.mode == "fixed":
        body, last = _block_sum(fn, 0, policy.max_n)
        total = math.fsum([head, body])
        tail = tail_estimate(alpha, lam, zeta, policy.max_n, last)
        ok = tail <= policy.rel_tol * max(abs(total), 1e-300)
        return total, SumDiagnostics(policy.max_n, tail, ok)

    parts = [head]
    n = 0
    while True:
        n1 = min(n + policy.block_size, policy.hard_cap)
        block, last = _block_sum(fn, n, n1)
        parts.append(block)
        n = n1
        total = math.fsum(parts)
        tail = tail_estimate(alpha, lam, zeta, n, last)
        tol = policy.rel_tol * abs(total) + 1e-15
        if abs(block) < tol and tail < tol:
            return total, SumDiagnostics(n, tail, True)
        if n >= policy.hard_cap:
            diag = SumDiagnostics(n, tail, False)
            raise ConvergenceError(
                f"image sum not converged at hard cap {policy.hard_cap} "
                f"(alpha={alpha}, lam={lam}, zeta={zeta}, tail~{tail:.3g})",
                diagnostics=diag, partial=total)


def scaled_image_sum(setup: ReducedSetup, policy: TruncationPolicy = DEFAULT_POLICY):
    """``alpha * S``: the image sum of ``alpha * J``, with diagnostics."""
    alpha = setup.alpha
    if not alpha > 0:
        raise DomainError("alpha must be > 0 for the accelerated image sum")
    if setup.scenario is Scenario.FREE:
        return 2.0, SumDiagnostics()
    if setup.scenario is Scenario.SINGLE:
        return 2.0 - scaled_kernel(setup.zeta, alpha), SumDiagnostics()
    return _double_scaled_sum(alpha, setup.lam, setup.zeta, policy)


def image_sum(setup: ReducedSetup, policy: TruncationPolicy = DEFAULT_POLICY):
    """``S = sum_n [J(|lam n|) - J(|lam n + zeta|)]`` and its truncation diagnostics.

    Free space keeps only ``J(0) = 2/alpha``; a single mirror keeps ``n = 0``.

    Raises
    ------
    ConvergenceError
        Adaptive mode reached ``policy.hard_cap``.
    """
    s, diag = scaled_image_sum(setup, policy)
    return s / setup.alpha, diag


# ---------------------------------------------------------------------------
# inertial sums


def shifted_inertial_series(lam: float, zeta: float, hard_cap: int = 2 * 10**6, order: int = 10) -> float:
    """``sum_{n>=1} [g(lam n + zeta) + g(lam n - zeta)]`` with ``g(u) = sin(2u)/u``.

    The series converges only conditionally. Terms are ``Im(z^n h(n))`` with
    ``z = exp(2i lam)`` and smooth ``h``; after ``M`` explicit terms the tail
    is resummed by repeated summation by parts,
    ``sum_{n>M} z^n h(n) = z^{M+1}/(1-z) sum_j (z/(1-z))^j D^j h(M+1)``.
    """
    one_minus_z = abs(2.0 * math.sin(lam))
    if one_minus_z == 0.0:
        raise ConvergenceError(f"lam={lam} is a multiple of pi; tail resummation undefined")
    m = max(1000, int(math.ceil(200.0 / one_minus_z)))
    if m > hard_cap:
        raise ConvergenceError(f"lam={lam} too close to a multiple of pi for hard cap {hard_cap}")
    direct, _ = _block_sum(lambda n: inertial_kernel(lam * n + zeta) + inertial_kernel(lam * n - zeta), 0, m)

    z = complex(math.cos(2.0 * lam), math.sin(2.0 * lam))
    ratio = z / (1.0 - z)
    b = zeta / lam
    cp = complex(math.cos(2.0 * zeta), math.sin(2.0 * zeta)) / lam
    cm = cp.conjugate()
    n0 = m + 1
    acc = 0j
    prod_p = 1.0 / (n0 + b)
    prod_m = 1.0 / (n0 - b)
    fact = 1.0
    w = 1.0 + 0j
    for j in range(order + 1):
        # forward difference D^j of 1/(n + b): (-1)^j j! / prod_{i<=j} (n + b + i)
        dj = ((-1) ** j) * fact * (cp * prod_p + cm * prod_m)
        acc += w * dj
        w *= ratio
        fact *= j + 1
        prod_p /= n0 + b + j + 1
        prod_m /= n0 - b + j + 1
    phase = math.fmod(2.0 * lam * n0, 2.0 * math.pi)
    zn = complex(math.cos(phase), math.sin(phase))
    tail = (zn / (1.0 - z) * acc).imag
    return math.fsum([direct, tail])


def inertial_scaled_sum(setup: ReducedSetup, hard_cap: int = 2 * 10**6) -> float:
    """``S0``: the image sum built from ``sin(2u)/u`` (``alpha``-independent)."""
    sc = setup.scenario
    if sc is Scenario.FREE:
        return 2.0
    zeta = setup.zeta
    if sc is Scenario.SINGLE:
        return 2.0 - inertial_kernel(zeta)
    lam = setup.lam
    unshifted = 2.0 + 2.0 * sawtooth(2.0 * lam) / lam
    shifted = inertial_kernel(zeta) + shifted_inertial_series(lam, zeta, hard_cap)
    return unshifted - shifted


def inertial_coefficients(setup: ReducedSetup, policy: TruncationPolicy = DEFAULT_POLICY) -> Tuple[float, float]:
    """Inertial ``(A0, B0)`` in units of ``kappa omega0``; always equal."""
    a0 = inertial_scaled_sum(setup, policy.hard_cap) * _INV_16PI
    return a0, a0


def rate_coefficients(setup: ReducedSetup, policy: TruncationPolicy = DEFAULT_POLICY) -> RateCoefficients:
    """Accelerated and inertial Lindblad coefficients for ``setup``."""
    s, diag = scaled_image_sum(setup, policy)
    b = s * _INV_16PI
    cm1 = coth_minus_one(setup.alpha)
    a = b + cm1 * b
    a0, b0 = inertial_coefficients(setup, policy)
    return RateCoefficients(A=a, B=b, A0=a0, B0=b0, alpha=setup.alpha, coth_minus_one=cm1, diagnostics=diag)


def closed_form_sums(scenario, alpha, zeta):
    """Vectorised ``(alpha S, S0)`` for free space or a single mirror."""
    scenario = Scenario.parse(scenario)
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise DomainError("alpha must be > 0")
    if scenario is Scenario.FREE:
        shape = np.broadcast(alpha, np.asarray(0.0 if zeta is None else zeta)).shape
        return np.full(shape, 2.0), np.full(shape, 2.0)
    if scenario is Scenario.DOUBLE:
        raise DomainError("closed-form sums exist only for free space and a single mirror")
    zeta = np.asarray(zeta, dtype=float)
    if np.any(zeta <= 0):
        raise DomainError("zeta must be > 0")
    u = np.abs(zeta)
    x = alpha * u
    s = 2.0 - np.sin((2.0 / alpha) * np.arcsinh(x)) / (u * np.hypot(1.0, x))
    s0 = 2.0 - np.sin(2.0 * u) / u
    return np.broadcast_arrays(s, s0)


def gamma_rates(coeffs: RateCoefficients, slack: float = 1e-12) -> Tuple[float, float]:
    """Emission and absorption rates ``(gamma(omega0), gamma(-omega0))``.

    ``gamma(omega0) = 2 (A + B)`` and ``gamma(-omega0) = 2 (A - B)``, in the
    same units as the coefficients.
    """
    a, b = coeffs.A, coeffs.B
    if a < abs(b) - slack * abs(a):
        raise InconsistencyError(f"A={a} smaller than |B|={abs(b)}")
    if coeffs.coth_minus_one is not None:
        minus = 2.0 * coeffs.coth_minus_one * b
    else:
        minus = 2.0 * (a - b)
    return 2.0 * (a + b), minus
