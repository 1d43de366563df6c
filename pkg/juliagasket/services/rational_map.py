"""
Evaluation and orbit analysis of R(z) = z^n + lambda / z^m on the sphere.
"""
import cmath
import logging
import math
from typing import List, Optional, Sequence, Union

import numpy as np

from juliagasket.core.config import settings
from juliagasket.core.exceptions import (
    ClassificationInconclusiveError,
    DomainError,
    PoleCollisionError,
    SolverError,
)
from juliagasket.schemas.map_spec import MapSpec
from juliagasket.schemas.orbit import ClassificationReport, OrbitAnalysis

logger = logging.getLogger(__name__)


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity()

ExtendedComplex = Union[complex, _Infinity]


def evaluate(spec: MapSpec, z: ExtendedComplex) -> ExtendedComplex:
    """R(z), with R(0) = R(inf) = inf."""
    if z is INFINITY:
        return INFINITY
    z = complex(z)
    if z == 0:
        return INFINITY
    return z ** spec.n + spec.lam / z ** spec.m


def derivative(spec: MapSpec, z: complex) -> complex:
    """R'(z) = n z^{n-1} - m lambda / z^{m+1}."""
    z = complex(z)
    if z == 0:
        raise DomainError("R' is undefined at the pole z = 0", {"z": [0.0, 0.0]})
    return spec.n * z ** (spec.n - 1) - spec.m * spec.lam / z ** (spec.m + 1)


def escape_radius(spec: MapSpec) -> float:
    """Radius beyond which every orbit tends to infinity."""
    return max(
        2.0,
        (2.0 * abs(spec.lam)) ** (1.0 / spec.m),
        2.0 ** (1.0 / (spec.n - 1)),
    )


def critical_points(spec: MapSpec) -> List[complex]:
    """The N roots of n z^N = m lambda, sorted by argument ascending."""
    N = spec.N
    base = spec.m * spec.lam / spec.n
    modulus = abs(base) ** (1.0 / N)
    phase = cmath.phase(base)
    points = [
        cmath.rect(modulus, (phase + 2.0 * math.pi * k) / N) for k in range(N)
    ]
    return sorted(points, key=lambda c: (cmath.phase(c), abs(c)))


def critical_values(spec: MapSpec) -> List[complex]:
    return [evaluate(spec, c) for c in critical_points(spec)]


def _cycle_multiplier(spec: MapSpec, cycle: Sequence[complex]) -> complex:
    # chain rule along the cycle
    result = 1 + 0j
    for z in cycle:
        result *= derivative(spec, z)
    return result


def _iterate(spec: MapSpec, z: complex, times: int) -> complex:
    for _ in range(times):
        z = evaluate(spec, z)
        if z is INFINITY:
            raise PoleCollisionError("orbit reached the pole while polishing a cycle")
    return z


def _polish_cycle_point(spec: MapSpec, z: complex, period: int) -> complex:
    """Newton on R^p(z) - z = 0, derivative by the chain rule."""
    for _ in range(settings.NEWTON_MAX_ITER):
        w = z
        slope = 1 + 0j
        for _ in range(period):
            slope *= derivative(spec, w)
            w = evaluate(spec, w)
        denominator = slope - 1
        if denominator == 0:
            break
        step = (w - z) / denominator
        z = z - step
        if abs(step) <= 1e-15 * (1 + abs(z)):
            break
    return z


def orbit_analysis(
    spec: MapSpec,
    z: complex,
    max_iter: int = None,
    tol: float = None,
) -> OrbitAnalysis:
    """
    Iterate R from z until the orbit recurs, escapes or max_iter is reached.

    The first recurrence |R^{a+p}(z) - R^a(z)| < tol fixes the preperiod a
    and period p; the cycle is then polished by Newton on R^p(w) = w.

    Raises:
        DomainError: z = 0 or invalid max_iter / tol
        PoleCollisionError: the orbit passes within tol of 0
    """
    max_iter = settings.ORBIT_MAX_ITER if max_iter is None else max_iter
    tol = settings.ORBIT_TOL if tol is None else tol
    z = complex(z)
    if z == 0:
        raise DomainError("orbit analysis needs a nonzero start", {"z": [0.0, 0.0]})
    if max_iter < 1 or tol <= 0:
        raise DomainError("max_iter must be >= 1 and tol > 0",
                          {"max_iter": max_iter, "tol": tol})

    radius = escape_radius(spec)
    orbit = [z]
    for step in range(1, max_iter + 1):
        current = orbit[-1]
        if abs(current) < tol:
            raise PoleCollisionError(
                f"orbit of {z} passes within {tol} of the pole",
                {"step": step - 1, "point": [current.real, current.imag]},
            )
        image = evaluate(spec, current)
        if image is INFINITY or abs(image) > radius:
            return OrbitAnalysis(start=z, converged=False, escaped=True, iterations=step)

        for a, earlier in enumerate(orbit):
            if abs(image - earlier) < tol:
                period = len(orbit) - a
                anchor = _polish_cycle_point(spec, earlier, period)
                cycle = [anchor]
                for _ in range(period - 1):
                    cycle.append(evaluate(spec, cycle[-1]))
                return OrbitAnalysis(
                    start=z,
                    preperiod=a,
                    period=period,
                    cycle=cycle,
                    multiplier=_cycle_multiplier(spec, cycle),
                    converged=True,
                    iterations=step,
                )
        orbit.append(image)

    return OrbitAnalysis(start=z, converged=False, escaped=False, iterations=max_iter)


def _dedupe(points: Sequence[complex], tol: float) -> List[complex]:
    unique: List[complex] = []
    for p in points:
        if all(abs(p - q) > tol for q in unique):
            unique.append(p)
    return unique


def argument_01(z: complex) -> float:
    """Argument in [0, 2pi); angles within 1e-12 of 2pi count as 0."""
    angle = cmath.phase(z) % (2.0 * math.pi)
    if 2.0 * math.pi - angle < 1e-12:
        angle = 0.0
    return angle


def _boundary_order(z: complex):
    """Argument in [0, 2pi), then modulus."""
    return (argument_01(z), abs(z))


def classify(
    spec: MapSpec,
    max_iter: int = None,
    tol: float = None,
) -> ClassificationReport:
    """
    Run orbit analysis on every critical point and test for Misiurewicz expansion.

    s is the product of the periods of the distinct cycles met; mu_min is the
    smallest |(R^s)'| over the cycle points.

    Raises:
        ClassificationInconclusiveError: a critical orbit neither recurred nor escaped
    """
    max_iter = settings.ORBIT_MAX_ITER if max_iter is None else max_iter
    tol = settings.ORBIT_TOL if tol is None else tol
    dedupe_tol = settings.POSTCRITICAL_TOL

    crit = critical_points(spec)
    orbits = [orbit_analysis(spec, c, max_iter, tol) for c in crit]

    unresolved = [o for o in orbits if not o.converged and not o.escaped]
    if unresolved:
        raise ClassificationInconclusiveError(
            f"{len(unresolved)} critical orbit(s) unresolved after {max_iter} steps",
            partial=orbits,
            detail={"unresolved": [[o.start.real, o.start.imag] for o in unresolved]},
        )

    preperiodic = all(o.converged for o in orbits)

    # distinct cycles, identified by any shared point
    cycles: List[OrbitAnalysis] = []
    for o in orbits:
        if not o.converged:
            continue
        if not any(min(abs(o.cycle[0] - w) for w in known.cycle) < dedupe_tol for known in cycles):
            cycles.append(o)

    periods = sorted(o.period for o in cycles)
    s = math.prod(periods) if periods else 1
    s_per_critical = math.prod(o.period for o in orbits if o.converged) if preperiodic else 1

    mu_min: Optional[float] = None
    indeterminate = False
    if cycles:
        mu_min = min(abs(o.multiplier) ** (s // o.period) for o in cycles)
        for o in cycles:
            if abs(abs(o.multiplier) - 1.0) <= settings.INDIFFERENT_TOL:
                indeterminate = True
                logger.warning(
                    f"⚠️  Indifferent cycle of period {o.period}: |multiplier| = {abs(o.multiplier):.9f}"
                )

    post_critical: List[complex] = []
    if preperiodic:
        for c, o in zip(crit, orbits):
            w = c
            for _ in range(o.preperiod):
                w = evaluate(spec, w)
                post_critical.append(w)
            post_critical.extend(o.cycle)
        post_critical = sorted(_dedupe(post_critical, dedupe_tol), key=_boundary_order)

    is_misiurewicz = preperiodic and mu_min is not None and mu_min > 1 and not indeterminate
    is_ms_candidate = is_misiurewicz and all(o.preperiod >= 1 for o in orbits)

    logger.info(
        f"📊 Classified {spec.to_json()}: periods={periods}, s={s}, "
        f"mu_min={mu_min}, misiurewicz={is_misiurewicz}"
    )
    return ClassificationReport(
        critical_points=crit,
        critical_values=critical_values(spec),
        critical_orbits=orbits,
        post_critical_set=post_critical,
        periods=periods,
        s=s,
        s_per_critical=s_per_critical,
        mu_min=mu_min,
        is_misiurewicz=is_misiurewicz,
        is_ms_candidate=is_ms_candidate,
        indeterminate=indeterminate,
    )


def symmetry_check(spec: MapSpec, samples: Sequence[complex]) -> float:
    """
    Largest defect of R(omega^i z) = omega^{i n} R(z), and of
    R(conj z) = conj R(z) when lambda is real.
    """
    z = np.asarray(samples, dtype=complex)
    if np.any(z == 0):
        raise DomainError("symmetry samples must be nonzero")

    def R(x):
        return x ** spec.n + spec.lam / x ** spec.m

    base = R(z)
    omega = spec.omega_N
    worst = 0.0
    for i in range(1, spec.N):
        rotated = R(omega ** i * z) - omega ** (i * spec.n) * base
        worst = max(worst, float(np.max(np.abs(rotated))))
    if spec.lam.imag == 0:
        worst = max(worst, float(np.max(np.abs(R(np.conj(z)) - np.conj(base)))))
    return worst


def refine_parameter(
    spec: MapSpec,
    preperiod: int,
    period: int,
    critical_index: int = 0,
    tol: float = 1e-13,
    max_iter: int = None,
) -> MapSpec:
    """
    Newton iteration on lambda for R^{a+p}(c) = R^a(c), c the chosen critical point.

    The critical point moves with lambda; the derivative in lambda is a
    central difference.
    """
    max_iter = settings.NEWTON_MAX_ITER if max_iter is None else max_iter

    def defect(lam: complex) -> complex:
        trial = spec.with_lambda(lam)
        c = critical_points(trial)[critical_index]
        w = _iterate(trial, c, preperiod)
        return _iterate(trial, w, period) - w

    lam = spec.lam
    value = defect(lam)
    for _ in range(max_iter):
        if abs(value) <= tol:
            break
        h = 1e-7 * max(1.0, abs(lam))
        slope = (defect(lam + h) - defect(lam - h)) / (2 * h)
        if slope == 0:
            break
        lam = lam - value / slope
        if spec.lam.imag == 0:
            lam = complex(lam.real, 0.0)
        value = defect(lam)

    if abs(value) > max(tol, 1e-10):
        raise SolverError(
            f"parameter refinement stalled at |defect| = {abs(value):.3e}",
            {"lambda": [lam.real, lam.imag], "defect": abs(value)},
        )
    logger.info(f"✅ Refined lambda {spec.lam} -> {lam} (|defect| = {abs(value):.2e})")
    return spec.with_lambda(lam)
