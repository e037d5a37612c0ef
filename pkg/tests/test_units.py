import math

import pytest
from hypothesis import given, strategies as st

from mirrorphase import units
from mirrorphase.errors import DomainError, GeometryError
from mirrorphase.units import CODATA, PAPER, LabSetup, ReducedSetup, Scenario


def test_paper_profile_gives_round_alpha():
    s = units.reduce(LabSetup(omega0=1e9, a=3e17, scenario="single", z0=0.3), PAPER)
    assert s.alpha == 1.0
    assert s.zeta == pytest.approx(1.0, rel=1e-15)


def test_zero_acceleration_reduces_to_zero_alpha():
    assert units.reduce(LabSetup(omega0=1e9, a=0.0)).alpha == 0.0


def test_codata_profile_is_scipy():
    from scipy import constants as sc
    assert CODATA.c == sc.c and CODATA.hbar == sc.hbar and CODATA.kB == sc.k


def test_constants_profile_lookup():
    assert units.constants_profile("PAPER") is PAPER
    with pytest.raises(DomainError):
        units.constants_profile("imperial")


def test_constants_must_be_positive():
    with pytest.raises(DomainError):
        units.PhysicalConstants(c=0.0, hbar=1.0, h=1.0, kB=1.0)


def test_double_geometry_rejected():
    with pytest.raises(GeometryError):
        LabSetup(omega0=1e9, a=1.0, scenario="double", z0=2.0, L=1.0)
    with pytest.raises(GeometryError):
        ReducedSetup(alpha=1e-6, scenario="double", zeta=600.0, lam=500.0)
    with pytest.raises(GeometryError):
        ReducedSetup(alpha=1e-6, scenario="single")


def test_invalid_fields():
    with pytest.raises(DomainError):
        LabSetup(omega0=0.0, a=1.0)
    with pytest.raises(DomainError):
        LabSetup(omega0=1.0, a=-1.0)
    with pytest.raises(DomainError):
        ReducedSetup(alpha=1.0, kappa=0.0)
    with pytest.raises(DomainError):
        ReducedSetup(alpha=1.0, theta=4.0)


def test_scenario_aliases():
    assert Scenario.parse("DoubleMirror") is Scenario.DOUBLE
    assert Scenario.parse("free_space") is Scenario.FREE
    with pytest.raises(DomainError):
        Scenario.parse("triple")


def test_reduce_drops_irrelevant_geometry():
    s = units.reduce(LabSetup(omega0=1e9, a=1e10, scenario="single", z0=1.0, L=5.0))
    assert s.lam is None
    assert units.reduce(LabSetup(omega0=1e9, a=1e10, z0=1.0)).zeta is None


@given(
    omega0=st.floats(1e6, 1e12),
    a=st.one_of(st.just(0.0), st.floats(1e-3, 1e22)),
    z0=st.floats(1e-6, 1e3),
    frac=st.floats(0.01, 0.99),
)
def test_round_trip(omega0, a, z0, frac):
    lab = LabSetup(omega0=omega0, a=a, scenario="double", z0=z0 * frac, L=z0, kappa=0.3, theta=1.0)
    back = units.unreduce(units.reduce(lab), omega0)
    for f in ("omega0", "a", "z0", "L", "kappa", "theta"):
        assert getattr(back, f) == pytest.approx(getattr(lab, f), rel=1e-12, abs=0.0)
    assert back.scenario is lab.scenario


def test_unruh_temperature_values():
    assert units.unruh_temperature(2.466e20) == pytest.approx(1.00, rel=1e-3)
    assert units.unruh_temperature(1e21) == pytest.approx(4.05, rel=2e-3)
    assert units.unruh_temperature(0.0) == 0.0
    with pytest.raises(DomainError):
        units.unruh_temperature(-1.0)


@given(a=st.floats(1.0, 1e25), k=st.integers(2, 50))
def test_unruh_linear(a, k):
    assert units.unruh_temperature(k * a) == pytest.approx(k * units.unruh_temperature(a), rel=1e-14)


def test_thermal_gradient():
    a = units.thermal_gradient_acceleration(1.0, 1e-5, 1.6735e-27)
    assert a == pytest.approx(8.25e8, rel=2e-3)
    assert units.thermal_gradient_acceleration(0.0, 1e-5) == 0.0
    assert units.thermal_gradient_acceleration(2.0, 1e-5) == pytest.approx(2 * a, rel=1e-15)
    assert units.thermal_gradient_acceleration(1.0, 2e-5) == pytest.approx(a / 2, rel=1e-15)
    assert units.thermal_gradient_acceleration(1.0, 1e-5, 2 * 1.6735e-27) == pytest.approx(a / 2, rel=1e-15)
    for bad in ((1.0, 0.0, 1.0), (1.0, 1e-5, 0.0), (-1.0, 1e-5, 1.0)):
        with pytest.raises(DomainError):
            units.thermal_gradient_acceleration(*bad)


def test_de_broglie_and_fringe():
    lam = units.de_broglie_wavelength(1.6735e-27, 1e3)
    assert lam == pytest.approx(3.96e-10, rel=2e-3)
    assert units.fringe_phase_from_path(lam) == pytest.approx(2 * math.pi, rel=1e-14)
    assert units.fringe_phase_from_path(0.0) == 0.0
    with pytest.raises(DomainError):
        units.de_broglie_wavelength(1.0, 0.0)
    with pytest.raises(DomainError):
        units.fringe_phase_from_path(1.0, mass=0.0)
