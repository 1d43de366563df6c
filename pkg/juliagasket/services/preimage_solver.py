"""
Preimages R^{-1}(w) as roots of z^N - w z^m + lambda.

Roots come from Aberth-Ehrlich simultaneous iteration, are Newton
polished, and roots sitting on a critical point are merged with
multiplicity 2.
"""
import logging
import math
from typing import List, Sequence

import numpy as np

from juliagasket.core.config import settings
from juliagasket.core.exceptions import DomainError, SolverError
from juliagasket.schemas.map_spec import MapSpec
from juliagasket.schemas.preimage import PreimageRoot, PreimageSet
from juliagasket.services.rational_map import argument_01, critical_points, evaluate

logger = logging.getLogger(__name__)


def preimage_polynomial(spec: MapSpec, w: complex) -> np.ndarray:
    """Coefficients of z^N - w z^m + lambda, highest degree first."""
    coeffs = np.zeros(spec.N + 1, dtype=complex)
    coeffs[0] = 1.0
    coeffs[spec.N - spec.m] -= w
    coeffs[spec.N] += spec.lam
    return coeffs


def _aberth(coeffs: np.ndarray, z: np.ndarray, max_sweeps: int, tol: float):
    derivative = np.polyder(coeffs)
    for sweep in range(1, max_sweeps + 1):
        values = np.polyval(coeffs, z)
        slopes = np.polyval(derivative, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(slopes != 0, values / slopes, 0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            repulsion = np.sum(1.0 / diff, axis=1)
            delta = ratio / (1.0 - ratio * repulsion)
        delta = np.where(np.isfinite(delta), delta, 0)
        z = z - delta
        if np.max(np.abs(delta)) <= tol * (1.0 + np.max(np.abs(z))):
            return z, sweep
    return z, max_sweeps


def _newton_polish(coeffs: np.ndarray, z: np.ndarray, steps: int = 3) -> np.ndarray:
    derivative = np.polyder(coeffs)
    polished = z.copy()
    for k in range(len(polished)):
        current = polished[k]
        for _ in range(steps):
            slope = np.polyval(derivative, current)
            if slope == 0:
                break
            candidate = current - np.polyval(coeffs, current) / slope
            if abs(np.polyval(coeffs, candidate)) >= abs(np.polyval(coeffs, current)):
                break
            current = candidate
        polished[k] = current
    return polished


def solve_preimages(spec: MapSpec, w: complex, tol: float = None) -> PreimageSet:
    """
    All N roots of z^N - w z^m + lambda with multiplicities.

    Raises:
        DomainError: tol <= 0
        SolverError: residuals above 1e-10 (1 + |w| + |lambda|) after the sweep cap
    """
    tol = settings.PREIMAGE_TOL if tol is None else tol
    if tol <= 0:
        raise DomainError("tol must be positive", {"tol": tol})
    w = complex(w)
    N = spec.N
    coeffs = preimage_polynomial(spec, w)
    scale = 1.0 + abs(w) + abs(spec.lam)

    radius = scale ** (1.0 / N)
    angles = 2.0 * math.pi * np.arange(N) / N + settings.ABERTH_ANGLE_OFFSET
    start = radius * np.exp(1j * angles)

    roots, sweeps = _aberth(coeffs, start, settings.ABERTH_MAX_SWEEPS, tol)
    roots = _newton_polish(coeffs, roots)
    residuals = np.abs(np.polyval(coeffs, roots))
    if np.max(residuals) > 1e-10 * scale:
        raise SolverError(
            f"Aberth iteration did not converge for w = {w}",
            {
                "target": [w.real, w.imag],
                "best_iterate": [[r.real, r.imag] for r in roots],
                "residuals": residuals.tolist(),
                "sweeps": sweeps,
            },
        )

    pool = list(roots)
    merged: List[PreimageRoot] = []

    # roots on a critical point are one vertex of local degree 2; p(c) = c^m (R(c) - w)
    snap_radius = 10.0 * tol * scale
    for c in critical_points(spec):
        if abs(evaluate(spec, c) - w) > snap_radius:
            continue
        if abs(np.polyval(coeffs, c)) > 1e-10 * scale:
            continue
        if len(pool) < 2:
            break
        pool.sort(key=lambda r: abs(r - c))
        pool = pool[2:]
        merged.append(PreimageRoot(root=c, multiplicity=2))

    cluster_radius = 10.0 * tol * scale
    while pool:
        seed = pool.pop(0)
        members = [seed] + [r for r in pool if abs(r - seed) <= cluster_radius]
        pool = [r for r in pool if abs(r - seed) > cluster_radius]
        merged.append(PreimageRoot(root=complex(np.mean(members)), multiplicity=len(members)))

    merged.sort(key=lambda r: (argument_01(r.root), abs(r.root)))
    final = np.array([r.root for r in merged])
    return PreimageSet(
        target=w,
        roots=merged,
        residuals=np.abs(np.polyval(coeffs, final)).tolist(),
    )


def solve_many(spec: MapSpec, targets: Sequence[complex], tol: float = None) -> List[PreimageSet]:
    """Preimage sets for several targets, in input order."""
    return [solve_preimages(spec, w, tol) for w in targets]
