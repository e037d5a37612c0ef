"""Physical constants and conversions between SI and dimensionless inputs.

Two constant profiles are provided. ``CODATA`` carries the CODATA 2018
values shipped with :mod:`scipy.constants`; the rounded profile ``PAPER``
(CLI name ``paper``) replaces the speed of light by 3e8 m/s so that conversions such as
``a / (omega0 c) = 1  <=>  a = 3e17 m/s^2`` (omega0 = 1e9 s^-1) come out exact.

All quantities are SI and angles are radians. Nothing here infers units.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

from scipy import constants as _sc

from .errors import DomainError, GeometryError

#: Mass of a hydrogen atom (kg), used whenever a mass is not supplied.
HYDROGEN_MASS = 1.6735e-27


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants in SI units."""

    c: float
    hbar: float
    h: float
    kB: float
    name: str = "custom"

    def __post_init__(self):
        for field in ("c", "hbar", "h", "kB"):
            if not getattr(self, field) > 0:
                raise DomainError(f"constant {field} must be strictly positive")


CODATA = PhysicalConstants(c=_sc.c, hbar=_sc.hbar, h=_sc.h, kB=_sc.k, name="codata")
PAPER = replace(CODATA, c=3.0e8, name="paper")

_PROFILES = {"codata": CODATA, "paper": PAPER}


def constants_profile(name: str) -> PhysicalConstants:
    """Look up a constant profile by name (``"codata"`` or ``"paper"``)."""
    try:
        return _PROFILES[name.lower()]
    except KeyError:
        raise DomainError(f"unknown constants profile {name!r}; expected codata or paper") from None


class Scenario(str, enum.Enum):
    """Boundary configuration around the detector."""

    FREE = "free"
    SINGLE = "single"
    DOUBLE = "double"

    @classmethod
    def parse(cls, value) -> "Scenario":
        if isinstance(value, cls):
            return value
        aliases = {
            "free": cls.FREE, "freespace": cls.FREE, "none": cls.FREE,
            "single": cls.SINGLE, "singlemirror": cls.SINGLE,
            "double": cls.DOUBLE, "doublemirror": cls.DOUBLE,
        }
        key = str(value).lower().replace("_", "").replace("-", "")
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown scenario {value!r}") from None


def _check_angle(theta: float) -> None:
    if not 0.0 <= theta <= math.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta}")


def _check_geometry(scenario: Scenario, z: Optional[float], sep: Optional[float], zname: str, sname: str):
    if scenario is Scenario.FREE:
        return
    if z is None or not z > 0:
        raise GeometryError(f"{zname} must be > 0 for a {scenario.value} mirror setup")
    if scenario is Scenario.DOUBLE:
        if sep is None or not sep > 0:
            raise GeometryError(f"{sname} must be > 0 for a double mirror setup")
        if not z < sep:
            raise GeometryError(f"need 0 < {zname} < {sname}, got {zname}={z}, {sname}={sep}")


@dataclass(frozen=True)
class LabSetup:
    """Full run description in SI units.

    Parameters
    ----------
    omega0 : float
        Detector gap as an angular frequency (s^-1).
    a : float
        Proper acceleration (m/s^2).
    z0 : float, optional
        Distance from the detector to the mirror at z = 0 (m).
    L : float, optional
        Mirror separation (m); double mirror only.
    kappa : float
        Dimensionless coupling lambda^2 / (hbar c^3).
    theta : float
        Initial Bloch polar angle (rad).
    """

    omega0: float
    a: float
    scenario: Scenario = Scenario.FREE
    z0: Optional[float] = None
    L: Optional[float] = None
    kappa: float = 1.0
    theta: float = math.pi / 4

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario.parse(self.scenario))
        if not self.omega0 > 0:
            raise DomainError("omega0 must be > 0")
        if not self.a >= 0:
            raise DomainError("acceleration must be >= 0")
        if not self.kappa > 0:
            raise DomainError("kappa must be > 0")
        _check_angle(self.theta)
        _check_geometry(self.scenario, self.z0, self.L, "z0", "L")


@dataclass(frozen=True)
class ReducedSetup:
    """Dimensionless description of a run.

    ``alpha = a/(omega0 c)``, ``zeta = omega0 z0/c`` and ``lam = omega0 L/c``.
    ``zeta`` is ignored in free space and ``lam`` outside the double mirror.
    """

    alpha: float
    scenario: Scenario = Scenario.FREE
    zeta: Optional[float] = None
    lam: Optional[float] = None
    kappa: float = 1.0
    theta: float = math.pi / 4

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario.parse(self.scenario))
        if not self.alpha >= 0:
            raise DomainError("alpha must be >= 0")
        if not self.kappa > 0:
            raise DomainError("kappa must be > 0")
        _check_angle(self.theta)
        _check_geometry(self.scenario, self.zeta, self.lam, "zeta", "lam")

    def with_(self, **changes) -> "ReducedSetup":
        """Copy with some fields replaced (re-validated)."""
        return replace(self, **changes)


def reduce(setup: LabSetup, constants: PhysicalConstants = CODATA) -> ReducedSetup:
    """Convert an SI setup to dimensionless groups."""
    w, c = setup.omega0, constants.c
    zeta = None if setup.z0 is None else w * setup.z0 / c
    lam = None if setup.L is None else w * setup.L / c
    if setup.scenario is not Scenario.DOUBLE:
        lam = None
    if setup.scenario is Scenario.FREE:
        zeta = None
    return ReducedSetup(
        alpha=setup.a / (w * c),
        scenario=setup.scenario,
        zeta=zeta,
        lam=lam,
        kappa=setup.kappa,
        theta=setup.theta,
    )


def unreduce(reduced: ReducedSetup, omega0: float, constants: PhysicalConstants = CODATA) -> LabSetup:
    """Inverse of :func:`reduce` for a given detector gap ``omega0``."""
    if not omega0 > 0:
        raise DomainError("omega0 must be > 0")
    c = constants.c
    return LabSetup(
        omega0=omega0,
        a=reduced.alpha * omega0 * c,
        scenario=reduced.scenario,
        z0=None if reduced.zeta is None else reduced.zeta * c / omega0,
        L=None if reduced.lam is None else reduced.lam * c / omega0,
        kappa=reduced.kappa,
        theta=reduced.theta,
    )


def unruh_temperature(a: float, constants: PhysicalConstants = CODATA) -> float:
    """Unruh temperature ``hbar a / (2 pi c kB)`` in kelvin."""
    if a < 0:
        raise DomainError("acceleration must be >= 0")
    return constants.hbar * a / (2.0 * math.pi * constants.c * constants.kB)


def thermal_gradient_acceleration(delta_t: float, delta_x: float, mass: float = HYDROGEN_MASS,
                                  constants: PhysicalConstants = CODATA) -> float:
    """Acceleration from a temperature step over a distance, ``kB dT = m a dx``."""
    if not delta_x > 0:
        raise DomainError("delta_x must be > 0")
    if not mass > 0:
        raise DomainError("mass must be > 0")
    if delta_t < 0:
        raise DomainError("delta_t must be >= 0")
    return constants.kB * delta_t / (mass * delta_x)


def de_broglie_wavelength(mass: float, speed: float, constants: PhysicalConstants = CODATA) -> float:
    """Non-relativistic de Broglie wavelength ``h / (m v)``."""
    if not mass > 0:
        raise DomainError("mass must be > 0")
    if not speed > 0:
        raise DomainError("speed must be > 0")
    return constants.h / (mass * speed)


def fringe_phase_from_path(path_diff: float, mass: float = HYDROGEN_MASS, speed: float = 1.0e3,
                           constants: PhysicalConstants = CODATA) -> float:
    """Interferometric phase ``2 pi dx / lambda_dB`` of a path difference."""
    return 2.0 * math.pi * path_diff / de_broglie_wavelength(mass, speed, constants)
