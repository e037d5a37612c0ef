"""Independent numerical checks of the closed-form rates.

:func:`fourier_term_check` integrates the regulated Wightman function of a
single image along the hyperbolic trajectory and compares it with the
per-image emission and absorption rates implied by the kernel. The series
helpers (:func:`brute_force_phase`, :func:`abel_sine_series`,
:func:`inertial_mode_sum`) evaluate the image sums by routes that share no
code path with the summation-by-parts evaluation in :mod:`mirrorphase.kernel`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate

from . import kernel
from .errors import DomainError, OracleError
from .kernel import RateCoefficients, SumDiagnostics
from .phase import PhaseResult, _delta_core, berry_phase
from .units import CODATA, LabSetup, PhysicalConstants, ReducedSetup, Scenario


@dataclass(frozen=True)
class IntegralConfig:
    """Regulator and quadrature settings for the Fourier oracle.

    ``epsilon`` and the entries of ``epsilon_ladder`` are in units of the
    rapidity ``a dtau / 2c``. ``half_width=None`` picks ``40 / min(1, 2/alpha)``.
    ``quadrature`` is the adaptive subdivision budget per unit of width.
    """

    epsilon: float = 1e-2
    half_width: Optional[float] = None
    quadrature: int = 50
    epsilon_ladder: Sequence[float] = (1e-2, 5e-3, 2.5e-3)

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be > 0")
        lad = tuple(float(e) for e in self.epsilon_ladder)
        if len(lad) < 1 or any(e <= 0 for e in lad) or any(b >= a for a, b in zip(lad, lad[1:])):
            raise DomainError("epsilon ladder must be positive and strictly decreasing")
        object.__setattr__(self, "epsilon_ladder", lad)
        if self.quadrature < 1:
            raise DomainError("quadrature budget must be >= 1")

    def width_for(self, alpha: float) -> float:
        need = 40.0 / min(1.0, 2.0 / alpha)
        if self.half_width is None:
            return need
        if self.half_width < need:
            raise DomainError(f"half_width {self.half_width} shorter than required {need}")
        return self.half_width


# ---------------------------------------------------------------------------
# Wightman function on the trajectory


def _regulated_denominator(x, g, eps):
    return 1.0 / (np.sinh(x - 1j * eps) ** 2 - g * g)


def wightman_on_trajectory(dtau: float, setup: LabSetup, n: int = 0, epsilon: float = 1e-3,
                           constants: PhysicalConstants = CODATA) -> complex:
    """Image ``n`` of the mirror Wightman function along the hyperbola (SI units).

    With ``x = a dtau / 2c`` the interval to the image at transverse offset
    ``d`` is ``(4c^4/a^2)[sinh^2(x - i eps) - (a d / 2c^2)^2]``. The direct
    image sits at ``d = 2Ln`` and the reflected one at ``d = 2 z0 - 2Ln``
    (subtracted, Dirichlet mirrors). Free space has only the ``n = 0`` direct
    term and a single mirror only ``n = 0``.
    """
    a, c = setup.a, constants.c
    if not a > 0:
        raise DomainError("wightman_on_trajectory needs a > 0")
    if setup.scenario is not Scenario.DOUBLE and n != 0:
        raise DomainError("only n = 0 exists without a second mirror")
    x = a * dtau / (2.0 * c)
    pref = -constants.hbar / (4.0 * math.pi**2 * c) * a * a / (4.0 * c**4)
    sep = setup.L if setup.scenario is Scenario.DOUBLE else 0.0
    g = a * sep * n / c**2
    val = _regulated_denominator(x, g, epsilon)
    if setup.scenario is not Scenario.FREE:
        gbar = a * (setup.z0 - sep * n) / c**2
        val = val - _regulated_denominator(x, gbar, epsilon)
    return complex(pref * val)


# ---------------------------------------------------------------------------
# Fourier identity per image


@dataclass(frozen=True)
class FourierCheck:
    """Per-image rate in units of ``kappa omega0``: numeric vs closed form.

    ``numeric``/``closed_form`` are the emission contribution
    ``gamma(omega0)``; the ``*_minus`` fields are the absorption
    contribution ``gamma(-omega0)``.
    """

    numeric: float
    closed_form: float
    rel_error: float
    numeric_minus: float
    closed_form_minus: float
    rel_error_minus: float
    ladder_values: tuple = field(default=(), repr=False)


def _rapidity_integral(g: float, nu: float, eps: float, sign: int, width: float, budget: int) -> float:
    """``int_{-W}^{W} e^{i sign nu x} / (sinh^2(x - i eps) - g^2) dx`` (real by symmetry)."""
    # f(-x) = conj f(x), so the integral is twice the real part over [0, W]
    def f(x):
        return (np.exp(1j * sign * nu * x) * _regulated_denominator(x, g, eps)).real

    pole = math.asinh(g)
    edges = {0.0, width, min(width, pole + 5.0)}
    for d in (-40.0, -4.0, 0.0, 4.0, 40.0):
        q = pole + d * eps
        if 0.0 < q < width:
            edges.add(q)
    edges = sorted(edges)
    limit = max(50, int(budget * width))
    total, worst = 0.0, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            try:
                v, err = integrate.quad(f, lo, hi, limit=limit, epsabs=1e-14, epsrel=1e-12)
            except integrate.IntegrationWarning as exc:
                raise OracleError(f"quadrature failed on [{lo}, {hi}] (g={g}, nu={nu}, eps={eps}): {exc}") from None
            total += v
            worst = max(worst, err)
    return 2.0 * total


def _extrapolate_to_zero(eps: Sequence[float], vals: Sequence[float]) -> float:
    """Neville extrapolation of ``vals(eps)`` to ``eps = 0``."""
    x = list(eps)
    p = list(vals)
    m = len(x)
    for k in range(1, m):
        for i in range(m - k):
            p[i] = (x[i] * p[i + 1] - x[i + k] * p[i]) / (x[i] - x[i + k])
    return p[0]


def per_image_rates(g: float, alpha: float):
    """Closed-form ``(gamma(omega0), gamma(-omega0))`` of one image at rapidity offset ``g``."""
    nu = 2.0 / alpha
    j = nu if g == 0 else math.sin(nu * math.asinh(g)) / (g * math.sqrt(1.0 + g * g))
    cm1 = kernel.coth_minus_one(alpha)
    base = alpha / (8.0 * math.pi) * j
    return base * (2.0 + cm1), base * cm1


def fourier_term_check(g: float, alpha: float, cfg: IntegralConfig = IntegralConfig()) -> FourierCheck:
    """Numerically Fourier-transform one image term and compare to the closed form.

    The transform is evaluated at frequency ``+2/alpha`` (emission) and
    ``-2/alpha`` (absorption) for each ``epsilon`` of the ladder and then
    extrapolated to ``epsilon -> 0``.
    """
    if not alpha > 0:
        raise DomainError("alpha must be > 0")
    if g < 0:
        raise DomainError("g must be >= 0")
    nu = 2.0 / alpha
    width = cfg.width_for(alpha)
    scale = -alpha / (8.0 * math.pi**2)
    out = []
    ladder = []
    for sign in (+1, -1):
        vals = [_rapidity_integral(g, nu, e, sign, width, cfg.quadrature) for e in cfg.epsilon_ladder]
        ladder.append(tuple(vals))
        out.append(scale * _extrapolate_to_zero(cfg.epsilon_ladder, vals))
    cp, cm = per_image_rates(g, alpha)

    def rel(a, b):
        return abs(a - b) / abs(b) if b != 0 else abs(a - b)

    return FourierCheck(numeric=out[0], closed_form=cp, rel_error=rel(out[0], cp),
                        numeric_minus=out[1], closed_form_minus=cm, rel_error_minus=rel(out[1], cm),
                        ladder_values=tuple(ladder))


def detailed_balance_ratio(alpha: float, g: float = 0.0, cfg: IntegralConfig = IntegralConfig()) -> float:
    """``gamma(-omega0) / gamma(omega0)`` from the numeric integrals alone."""
    chk = fourier_term_check(g, alpha, cfg)
    return chk.numeric_minus / chk.numeric


# ---------------------------------------------------------------------------
# series oracles


def abel_sine_series(x: float, deltas: Sequence[float] = (4e-4, 2e-4, 1e-4)) -> float:
    """``sum_{n>=1} sin(n x)/n`` by Abel summation: damp with ``r^n``, extrapolate ``r -> 1``."""
    vals = []
    for d in deltas:
        r = 1.0 - d
        nmax = int(math.ceil(38.0 / d))
        n = np.arange(1, nmax + 1, dtype=float)
        vals.append(math.fsum(np.exp(n * math.log(r)) * np.sin(n * x) / n))
    return _extrapolate_to_zero(deltas, vals)


def inertial_mode_sum(lam: float, zeta: float) -> float:
    """Inertial double-mirror sum ``S0`` via Poisson resummation over cavity modes.

    ``S0 = (2 pi / lam) * sum_{1 <= k < lam/pi} (1 - cos(2 pi k zeta / lam))``;
    a mode exactly at ``k = lam/pi`` counts with weight 1/2.
    """
    kmax = lam / math.pi
    k = np.arange(1, int(math.floor(kmax)) + 1, dtype=float)
    w = np.where(np.isclose(k, kmax, rtol=0, atol=1e-12), 0.5, 1.0)
    return 2.0 * math.pi / lam * math.fsum(w * (1.0 - np.cos(2.0 * math.pi * k * zeta / lam)))


def brute_force_sums(setup: ReducedSetup, max_n: int):
    """``(alpha S, S0)`` from plain symmetric truncation at ``|n| <= max_n``."""
    alpha = setup.alpha
    if setup.scenario is not Scenario.DOUBLE:
        s, s0 = kernel.closed_form_sums(setup.scenario, alpha, setup.zeta)
        return float(s), float(s0)
    lam, zeta = setup.lam, setup.zeta
    chunk = 1 << 17
    acc, ine = [2.0 - kernel.scaled_kernel(zeta, alpha)], [2.0 - kernel.inertial_kernel(zeta)]
    for start in range(1, max_n + 1, chunk):
        n = np.arange(start, min(start + chunk, max_n + 1), dtype=float)
        acc.append(math.fsum(kernel.pair_terms(n, alpha, lam, zeta)))
        ine.append(math.fsum(kernel.inertial_pair_terms(n, lam, zeta)))
    return math.fsum(acc), math.fsum(ine)


def brute_force_phase(setup: ReducedSetup, max_n: int) -> PhaseResult:
    """Phase difference with both image sums cut at ``|n| <= max_n``."""
    if max_n < 1:
        raise DomainError("max_n must be >= 1")
    if not setup.alpha > 0:
        raise DomainError("alpha must be > 0")
    s, s0 = brute_force_sums(setup, max_n)
    b = s * kernel._INV_16PI
    cm1 = kernel.coth_minus_one(setup.alpha)
    b0 = s0 * kernel._INV_16PI
    used = max_n if setup.scenario is Scenario.DOUBLE else 0
    rates = RateCoefficients(A=b + cm1 * b, B=b, A0=b0, B0=b0, alpha=setup.alpha, coth_minus_one=cm1,
                             diagnostics=SumDiagnostics(used, float("nan"), True))
    k = setup.kappa
    return PhaseResult(
        phi_accel=berry_phase(k * rates.A, k * rates.B, setup.theta),
        phi_inertial=berry_phase(k * rates.A0, k * rates.B0, setup.theta),
        delta_phi=k * _delta_core(rates.dA, rates.dB, setup.theta),
        rates=rates,
        setup=setup,
    )


# ---------------------------------------------------------------------------
# suite


@dataclass(frozen=True)
class OracleCheck:
    name: str
    value: float
    reference: float
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.error < self.tol)


def run_oracle_suite(cfg: IntegralConfig = IntegralConfig(),
                     gs: Sequence[float] = (0.0, 0.5, 1.0, 5.0),
                     alphas: Sequence[float] = (0.5, 1.0, 2.0)) -> List[OracleCheck]:
    """Run every oracle check; each entry carries its own tolerance."""
    checks = []
    for a in alphas:
        for g in gs:
            r = fourier_term_check(g, a, cfg)
            checks.append(OracleCheck(f"fourier g={g:g} alpha={a:g}", r.numeric, r.closed_form, r.rel_error, 1e-3))
    ratio = detailed_balance_ratio(1.0, 0.0, cfg)
    ref = math.exp(-2.0 * math.pi)
    checks.append(OracleCheck("detailed balance alpha=1", ratio, ref, abs(ratio - ref) / ref, 1e-2))
    for x in (0.5, 1.0, 3.0, 6.0):
        v = abel_sine_series(x)
        ref = 0.5 * (math.pi - x)
        checks.append(OracleCheck(f"sine series x={x:g}", v, ref, abs(v - ref), 1e-6))
    return checks
