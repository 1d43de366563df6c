"""
Renormalization problem on V_0: Delta-Y transforms, the eigenvalue system
for (r_1, r_2, s_1, s_2, lambda), its symmetric closed form and an
exploratory scan for asymmetric conductances.

Shapes use the normalization y_0 = 1 of the star equivalent, so
s_1 = y_1 / y_0 and s_2 = y_2 / y_0.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from juliagasket.core.config import settings
from juliagasket.core.exceptions import DomainError, SolverError
from juliagasket.schemas.renorm import RenormSolution, ScanResult

logger = logging.getLogger(__name__)

Triple = Tuple[float, float, float]


def _require_positive(name: str, values: Sequence[float]) -> None:
    if any(not (v > 0) for v in values):
        raise DomainError(f"{name} must be positive", {name: list(values)})


@dataclass(frozen=True)
class TriangleNetwork:
    """Resistances on the V_0 triangle and their star equivalent."""

    delta: Triple  # w_i opposite vertex i
    y: Triple

    @classmethod
    def from_delta(cls, w: Sequence[float]) -> "TriangleNetwork":
        return cls(delta=tuple(w), y=delta_to_y(w))

    @property
    def shape(self) -> Tuple[float, float]:
        return self.y[1] / self.y[0], self.y[2] / self.y[0]


def delta_to_y(w: Sequence[float]) -> Triple:
    """y_i = w_j w_k / (w_0 + w_1 + w_2)."""
    _require_positive("delta", w)
    w0, w1, w2 = w
    D = w0 + w1 + w2
    return w1 * w2 / D, w0 * w2 / D, w0 * w1 / D


def y_to_delta(y: Sequence[float]) -> Triple:
    """w_i = (y_0 y_1 + y_1 y_2 + y_2 y_0) / y_i."""
    _require_positive("y", y)
    y0, y1, y2 = y
    P = y0 * y1 + y1 * y2 + y2 * y0
    return P / y0, P / y1, P / y2


def shape_from_conductances(c: Sequence[float]) -> Tuple[float, float]:
    """(s_1, s_2) of the triangle with conductance c_i on the edge opposite q_i."""
    _require_positive("conductances", c)
    return TriangleNetwork.from_delta([1.0 / x for x in c]).shape


def conductances_from_shape(s1: float, s2: float) -> Triple:
    """Inverse of shape_from_conductances, scaled to mean 1."""
    w = y_to_delta((1.0, s1, s2))
    c = np.array([1.0 / x for x in w])
    c = c / c.mean()
    return float(c[0]), float(c[1]), float(c[2])


def symmetric_s(r: float) -> float:
    """Positive root s_+ = (r - 1 + sqrt(5 r^2 - 2 r + 1)) / (r + 1) for weights (1, r, r)."""
    if not r > 0:
        raise DomainError("r must be positive", {"r": r})
    return (r - 1.0 + math.sqrt(5.0 * r * r - 2.0 * r + 1.0)) / (r + 1.0)


def sigma(r1: float, r2: float, s1: float, s2: float) -> float:
    return r1 + r2 + s1 + s2 + s1 * r1 + s2 * r2


def lambda_from_system(r1: float, r2: float, s1: float, s2: float) -> float:
    """lambda = 1 + s_1 s_2 (1 + r_1)(1 + r_2) / Sigma."""
    _require_positive("inputs", (r1, r2, s1, s2))
    return 1.0 + s1 * s2 * (1.0 + r1) * (1.0 + r2) / sigma(r1, r2, s1, s2)


def system_residuals(r1: float, r2: float, s1: float, s2: float, lam: float) -> Tuple[float, float]:
    """Defects (LHS - RHS) of the two shape equations."""
    S = sigma(r1, r2, s1, s2)
    first = S * s2 * r1 + s1 * (1.0 + r1) * (r1 + r2) - lam * s1 * S
    second = S * s1 * r2 + s2 * (1.0 + r2) * (r1 + r2) - lam * s2 * S
    return first, second


def _solution(r1: float, r2: float, s1: float, s2: float) -> RenormSolution:
    lam = lambda_from_system(r1, r2, s1, s2)
    return RenormSolution(
        r=(1.0, r1, r2),
        s=(s1, s2),
        lam=lam,
        r_tilde=(1.0 / lam, r1 / lam, r2 / lam),
        residuals=system_residuals(r1, r2, s1, s2, lam),
        Sigma=sigma(r1, r2, s1, s2),
    )


def solve_symmetric(r: float) -> RenormSolution:
    """
    Solution for weights (1, r, r).

    Raises:
        DomainError: r <= 0
        SolverError: a corrected weight left (0, 1)
    """
    s = symmetric_s(r)
    solution = _solution(r, r, s, s)
    if not all(0.0 < x < 1.0 for x in solution.r_tilde):
        raise SolverError("corrected weights must lie in (0, 1)",
                          {"r": r, "r_tilde": list(solution.r_tilde)})
    logger.info(f"✅ Symmetric renormalization r={r}: s={s:.12g}, lambda={solution.lam:.12g}")
    return solution


def _eliminate_r2(r1: float, s1: float, s2: float) -> float:
    """r_2 from the first shape equation, which is linear in r_2."""
    A = r1 * (1.0 + s1) + s1 + s2
    B = 1.0 + s2
    K1 = B * s2 * r1 + s1 * (1.0 + r1) - B * s1 - (1.0 + r1) * s1 * s1 * s2
    K0 = A * s2 * r1 + s1 * (1.0 + r1) * r1 - A * s1 - (1.0 + r1) * s1 * s1 * s2
    if K1 == 0:
        return math.nan
    return -K0 / K1


def _reduced(r1: float, s1: float, s2: float) -> float:
    r2 = _eliminate_r2(r1, s1, s2)
    if not r2 > 0:
        return math.nan
    lam = lambda_from_system(r1, r2, s1, s2)
    return system_residuals(r1, r2, s1, s2, lam)[1]


def _symmetric_branch(s: float) -> List[float]:
    """Positive r with r_1 = r_2 = r solving the system for s_1 = s_2 = s."""
    roots = np.roots([s * s - 2.0 * s - 4.0, 2.0 * s * s, s * s + 2.0 * s])
    return sorted(float(z.real) for z in roots if abs(z.imag) <= 1e-12 * abs(z) and z.real > 0)


def general_scan(
    c: Sequence[float],
    points: int = None,
    r_min: float = None,
    r_max: float = None,
    tol: float = None,
) -> ScanResult:
    """
    Positive solutions for base conductances c by a log-grid scan in r_1.

    Exploratory: every reported root has residuals <= 1e-8 Sigma^2, but the
    list is not claimed to be complete or unique. No sign change gives an
    empty list.
    """
    points = settings.SCAN_POINTS if points is None else points
    r_min = settings.SCAN_R_MIN if r_min is None else r_min
    r_max = settings.SCAN_R_MAX if r_max is None else r_max
    tol = settings.BISECTION_TOL if tol is None else tol
    if points < 2 or not (0 < r_min < r_max):
        raise DomainError("scan needs at least 2 points on 0 < r_min < r_max",
                          {"points": points, "r_min": r_min, "r_max": r_max})

    s1, s2 = shape_from_conductances(c)
    grid = np.geomspace(r_min, r_max, points)
    values = np.array([_reduced(float(r), s1, s2) for r in grid])

    solutions: List[RenormSolution] = []
    # at s = 1 the first equation degenerates along r_1 = 1, so the
    # symmetric branch is added directly whenever c_1 = c_2
    if abs(s1 - s2) <= 1e-12 * max(s1, s2):
        for r in _symmetric_branch(s1):
            solutions.append(_solution(r, r, s1, s1))

    for k in range(points - 1):
        lo, hi = float(grid[k]), float(grid[k + 1])
        g_lo, g_hi = values[k], values[k + 1]
        if not (np.isfinite(g_lo) and np.isfinite(g_hi)):
            continue
        if g_lo == 0:
            root = lo
        elif g_lo * g_hi > 0:
            continue
        else:
            while hi - lo > tol * hi:
                mid = 0.5 * (lo + hi)
                g_mid = _reduced(mid, s1, s2)
                if not np.isfinite(g_mid):
                    break
                if (g_mid < 0) == (g_lo < 0):
                    lo, g_lo = mid, g_mid
                else:
                    hi = mid
            root = 0.5 * (lo + hi)

        r2 = _eliminate_r2(root, s1, s2)
        if not r2 > 0:
            continue
        candidate = _solution(root, r2, s1, s2)
        if max(abs(x) for x in candidate.residuals) > 1e-8 * candidate.Sigma ** 2:
            continue
        if any(abs(candidate.r[1] - known.r[1]) <= 1e-9 * candidate.r[1] for known in solutions):
            continue
        solutions.append(candidate)

    if not solutions:
        logger.warning(f"⚠️  No renormalization root found for conductances {list(c)}")
    else:
        logger.info(f"🔍 Scan found {len(solutions)} root(s) for conductances {list(c)}")
    return ScanResult(c=tuple(c), s=(s1, s2), solutions=solutions)
