"""
Tests for the preimage solver.
"""
import numpy as np
import pytest

from juliagasket.core.exceptions import DomainError
from juliagasket.schemas.map_spec import MapSpec
from juliagasket.services import preimage_solver, rational_map


@pytest.fixture(scope="module")
def sg():
    return MapSpec.sierpinski()


def test_polynomial_coefficients(sg):
    """z^3 - w z - 16/27 for the gasket map."""
    coeffs = preimage_solver.preimage_polynomial(sg, 2.0)
    assert np.allclose(coeffs, [1, 0, -2, -16 / 27])


def test_preimages_of_fixed_point(sg):
    """R^{-1}(4/3) = {4/3, -2/3 (double)}."""
    pre = preimage_solver.solve_preimages(sg, 4 / 3)
    assert pre.total_multiplicity == 3
    assert len(pre.roots) == 2
    by_mult = {r.multiplicity: r.root for r in pre.roots}
    assert abs(by_mult[1] - 4 / 3) <= 1e-10
    assert abs(by_mult[2] + 2 / 3) <= 1e-10
    assert max(pre.residuals) <= 1e-10


def test_roots_sorted_by_argument(sg):
    pre = preimage_solver.solve_preimages(sg, 4 / 3)
    assert pre.points[0].real > 0


def test_random_targets(sg):
    """Multiplicities add to N and every root maps back onto its target."""
    rng = np.random.default_rng(1)
    targets = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-3, 3, 100)
    for pre in preimage_solver.solve_many(sg, targets):
        assert pre.total_multiplicity == 3
        for z in pre.points:
            assert abs(rational_map.evaluate(sg, z) - pre.target) <= 1e-8


def test_quartic_double_critical_values():
    """A critical value shared by two critical points gives two double roots."""
    spec = rational_map.refine_parameter(MapSpec(n=2, m=2, lam=-0.36428), preperiod=3, period=1)
    target = rational_map.evaluate(spec, rational_map.critical_points(spec)[0])
    pre = preimage_solver.solve_preimages(spec, target)
    assert pre.total_multiplicity == 4
    assert sorted(r.multiplicity for r in pre.roots) == [2, 2]


def test_rejects_nonpositive_tolerance(sg):
    with pytest.raises(DomainError):
        preimage_solver.solve_preimages(sg, 1.0, tol=0)


def test_near_critical_value_stays_simple(sg):
    """A target 1e-9 off the critical value 4/3 has three distinct simple roots."""
    target = 4 / 3 + 1e-9
    pre = preimage_solver.solve_preimages(sg, target)
    assert len(pre.roots) == 3
    assert all(r.multiplicity == 1 for r in pre.roots)
    bound = 1e-10 * (1 + abs(target) + 16 / 27)
    assert max(pre.residuals) <= bound


def test_critical_snap_follows_tolerance(sg):
    """A loose tolerance merges the split pair onto the critical point."""
    pre = preimage_solver.solve_preimages(sg, 4 / 3 + 1e-13, tol=1e-12)
    assert sorted(r.multiplicity for r in pre.roots) == [1, 2]
    double = next(r.root for r in pre.roots if r.multiplicity == 2)
    assert abs(double + 2 / 3) <= 1e-12


def test_second_iterate_has_nine_preimages(sg):
    """Pulling back twice gives N^2 = 9 roots counted with multiplicity."""
    rng = np.random.default_rng(2)
    targets = rng.uniform(-2, 2, 20) + 1j * rng.uniform(-2, 2, 20)
    for w in targets:
        total = 0
        for first in preimage_solver.solve_preimages(sg, w).roots:
            for second in preimage_solver.solve_preimages(sg, first.root).roots:
                total += first.multiplicity * second.multiplicity
                image = rational_map.evaluate(sg, rational_map.evaluate(sg, second.root))
                assert abs(image - w) <= 1e-8
        assert total == 9
