"""
Tests for evaluation, orbit analysis and classification of z^n + lambda / z^m.
"""
import cmath
import math

import numpy as np
import pytest

from juliagasket.core.exceptions import (
    ClassificationInconclusiveError,
    DomainError,
    PoleCollisionError,
    SolverError,
)
from juliagasket.schemas.map_spec import MapSpec
from juliagasket.services import rational_map
from juliagasket.services.rational_map import INFINITY

OMEGA = cmath.exp(2j * math.pi / 3)


@pytest.fixture(scope="module")
def sg():
    return MapSpec.sierpinski()


@pytest.fixture(scope="module")
def quartic():
    return rational_map.refine_parameter(MapSpec(n=2, m=2, lam=-0.36428), preperiod=3, period=1)


def test_evaluate_pole_and_infinity(sg):
    """0 and infinity both map to infinity."""
    assert rational_map.evaluate(sg, 0) is INFINITY
    assert rational_map.evaluate(sg, INFINITY) is INFINITY
    assert rational_map.evaluate(sg, 4 / 3) == pytest.approx(4 / 3, abs=1e-15)


def test_derivative_at_fixed_point(sg):
    """R'(4/3) = 3."""
    assert abs(rational_map.derivative(sg, 4 / 3) - 3) <= 1e-12


def test_derivative_undefined_at_pole(sg):
    with pytest.raises(DomainError):
        rational_map.derivative(sg, 0)


def test_critical_points_are_cube_roots(sg):
    """Critical points solve c^3 = -8/27 and include -2/3."""
    crit = rational_map.critical_points(sg)
    assert len(crit) == 3
    for c in crit:
        assert abs(c ** 3 + 8 / 27) <= 1e-9
    assert min(abs(c + 2 / 3) for c in crit) <= 1e-12


def test_critical_value_of_minus_two_thirds(sg):
    """R(-2/3) = 4/3."""
    assert abs(rational_map.evaluate(sg, -2 / 3) - 4 / 3) <= 1e-12
    values = rational_map.critical_values(sg)
    assert np.allclose(np.abs(values), 4 / 3, atol=1e-12)
    assert min(abs(v - 4 / 3) for v in values) <= 1e-12


def test_orbit_of_real_critical_point(sg):
    """-2/3 lands on the fixed point 4/3 after one step."""
    orbit = rational_map.orbit_analysis(sg, -2 / 3)
    assert orbit.converged
    assert orbit.preperiod == 1
    assert orbit.period == 1
    assert abs(orbit.multiplier - 3) <= 1e-9


def test_two_cycle_multiplier(sg):
    """(R^2)' = 9 on the cycle through (4/3) omega."""
    c = (2 / 3) * cmath.exp(1j * math.pi / 3)
    orbit = rational_map.orbit_analysis(sg, c)
    assert orbit.period == 2
    assert abs(orbit.multiplier - 9) <= 1e-9
    assert min(abs(z - 4 / 3 * OMEGA) for z in orbit.cycle) <= 1e-9


def test_orbit_escapes():
    """Large starting points escape."""
    spec = MapSpec(n=2, m=1, lam=1.0)
    orbit = rational_map.orbit_analysis(spec, 3.0)
    assert orbit.escaped
    assert not orbit.converged


def test_orbit_rejects_zero_start(sg):
    with pytest.raises(DomainError):
        rational_map.orbit_analysis(sg, 0)


def test_orbit_pole_collision(sg):
    """A point whose image is 0 collides with the pole."""
    z = (16 / 27) ** (1 / 3)
    with pytest.raises(PoleCollisionError):
        rational_map.orbit_analysis(sg, z)


def test_classify_sierpinski(sg):
    """The gasket map is Misiurewicz with cycles of period 1 and 2."""
    report = rational_map.classify(sg)
    assert report.is_misiurewicz
    assert report.is_ms_candidate
    assert report.periods == [1, 2]
    assert report.s == 2
    assert report.mu_min == pytest.approx(9.0, rel=1e-9)
    assert len(report.post_critical_set) == 3
    assert abs(report.post_critical_set[0] - 4 / 3) <= 1e-9
    assert abs(report.post_critical_set[1] - 4 / 3 * OMEGA) <= 1e-9


def test_classify_inconclusive_with_tiny_budget(sg):
    """One step is not enough to see any recurrence."""
    with pytest.raises(ClassificationInconclusiveError) as exc:
        rational_map.classify(sg, max_iter=1)
    assert len(exc.value.partial) == 3


def test_classify_escaping_map_is_not_misiurewicz():
    report = rational_map.classify(MapSpec(n=2, m=1, lam=1.0))
    assert not report.is_misiurewicz
    assert all(o.escaped for o in report.critical_orbits)


def test_symmetry_check(sg):
    """Rotation and conjugation symmetries hold to rounding."""
    rng = np.random.default_rng(0)
    samples = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-2, 2, 50)
    assert rational_map.symmetry_check(sg, samples) <= 1e-10


def test_symmetry_check_quartic_annulus(quartic):
    """Fourfold rotation and conjugation symmetry on 0.1 < |z| < 10."""
    rng = np.random.default_rng(4)
    radii = 10.0 ** rng.uniform(-1, 1, 100)
    samples = radii * np.exp(2j * np.pi * rng.uniform(0, 1, 100))
    assert rational_map.symmetry_check(quartic, samples) <= 1e-10


def test_escape_radius_is_at_least_two(sg):
    assert rational_map.escape_radius(sg) == 2.0
    assert rational_map.escape_radius(MapSpec(n=2, m=1, lam=10.0)) == pytest.approx(20.0)


def test_quartic_orbit_condition_with_rounded_parameter():
    """The rounded parameter nearly satisfies R^4(c) = R^3(c)."""
    spec = MapSpec(n=2, m=2, lam=-0.36428)
    c = rational_map.critical_points(spec)[0]
    w = c
    for _ in range(3):
        w = rational_map.evaluate(spec, w)
    assert abs(rational_map.evaluate(spec, w) - w) <= 1e-3


def test_refine_parameter_quartic(quartic):
    """Newton on lambda brings the orbit defect below 1e-10."""
    assert quartic.lam.imag == 0
    assert quartic.lam.real == pytest.approx(-0.36428, abs=1e-3)
    for c in rational_map.critical_points(quartic):
        w = c
        for _ in range(3):
            w = rational_map.evaluate(quartic, w)
        assert abs(rational_map.evaluate(quartic, w) - w) <= 1e-10


def test_classify_quartic(quartic):
    """Four critical points reach a repelling fixed point after three steps."""
    report = rational_map.classify(quartic)
    assert report.is_misiurewicz
    assert report.periods == [1]
    assert all(o.preperiod == 3 for o in report.critical_orbits)
    assert len(report.post_critical_set) == 4


def test_refine_parameter_reports_failure():
    """Running out of Newton steps far from a solution raises."""
    with pytest.raises(SolverError):
        rational_map.refine_parameter(MapSpec(n=2, m=1, lam=1.0), preperiod=0, period=1, max_iter=0)
