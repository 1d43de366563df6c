"""
Invariant measure, Laplacian assembly and eigenproblems on gasket levels.

Each m-cell carries mass N^{-m}, lumped equally onto its B corners. The
weak Laplacian solves L u = lambda M u with L the renormalized stiffness
matrix and M the diagonal of vertex masses.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Literal, Optional, Sequence

import numpy as np
from scipy import linalg, sparse

from juliagasket.core.exceptions import DomainError
from juliagasket.schemas.gluing import GluingTable
from juliagasket.schemas.spectrum import SpectralReport
from juliagasket.services.cell_complex import LevelGraph, build_level, dynamics_map
from juliagasket.services.dirichlet_form import ConductanceModel, stiffness

logger = logging.getLogger(__name__)

Kind = Literal["dirichlet", "neumann"]


@dataclass(frozen=True)
class VertexMeasure:
    level: int
    masses: np.ndarray
    cell_mass: object  # float or Fraction

    @property
    def total(self):
        return sum(self.masses)


@dataclass(frozen=True)
class MeasureDefect:
    """Largest vertex and cell defects of mu(R^{-1} A) = mu(A) between two levels."""

    level: int
    vertex_defect: object
    cell_defect: object
    preimage_cells: int


@dataclass(frozen=True)
class LaplacianPair:
    graph: LevelGraph
    stiffness: sparse.csr_matrix
    mass: np.ndarray
    boundary_ids: List[int]


def vertex_measure(graph: LevelGraph, exact: bool = False) -> VertexMeasure:
    """Lump each cell's mass N^{-m} equally onto its corners."""
    if exact:
        cell_mass = Fraction(1, graph.N ** graph.level)
        masses = np.array([Fraction(0)] * graph.vertex_count, dtype=object)
    else:
        cell_mass = float(graph.N) ** (-graph.level)
        masses = np.zeros(graph.vertex_count)
    share = cell_mass / graph.B
    for cell in graph.cells:
        for v in cell.vertices:
            masses[v] += share
    return VertexMeasure(level=graph.level, masses=masses, cell_mass=cell_mass)


def measure_invariance_check(table: GluingTable, m: int, exact: bool = True) -> MeasureDefect:
    """
    Compare mu_{m+1}(R^{-1}{w}) with mu_m({w}) for every w in V_m, and the
    mass of the preimage cells of every m-cell with its own mass. Each vertex
    of a fiber counts once.
    """
    if m < 0:
        raise DomainError("level must be nonnegative", {"level": m})
    coarse = build_level(table, m)
    fine = build_level(table, m + 1)
    mu = vertex_measure(coarse, exact)
    nu = vertex_measure(fine, exact)

    fiber_mass = [Fraction(0) if exact else 0.0 for _ in range(coarse.vertex_count)]
    for x, w in enumerate(dynamics_map(table, fine, coarse)):
        fiber_mass[w] += nu.masses[x]
    vertex_defect = max(abs(fiber_mass[w] - mu.masses[w]) for w in range(coarse.vertex_count))

    preimages = {cell.word: 0 for cell in coarse.cells}
    for cell in fine.cells:
        preimages[cell.word[1:]] += 1
    cell_defect = max(abs(count * nu.cell_mass - mu.cell_mass) for count in preimages.values())
    counts = set(preimages.values())

    logger.info(f"📊 Measure invariance level {m}: vertex defect {vertex_defect}, cell defect {cell_defect}")
    return MeasureDefect(
        level=m,
        vertex_defect=vertex_defect,
        cell_defect=cell_defect,
        preimage_cells=counts.pop() if len(counts) == 1 else -1,
    )


def assemble(graph: LevelGraph, model: ConductanceModel, measure: Optional[VertexMeasure] = None) -> LaplacianPair:
    """Stiffness from renormalized conductances and lumped masses."""
    measure = vertex_measure(graph) if measure is None else measure
    return LaplacianPair(
        graph=graph,
        stiffness=stiffness(graph, model.conductances(graph)),
        mass=np.array([float(x) for x in measure.masses]),
        boundary_ids=list(graph.boundary),
    )


def _free_ids(pair: LaplacianPair, kind: Kind) -> np.ndarray:
    if kind == "neumann":
        return np.arange(pair.graph.vertex_count)
    if kind != "dirichlet":
        raise DomainError("kind must be 'dirichlet' or 'neumann'", {"kind": kind})
    free = pair.graph.interior
    if free.size == 0:
        raise DomainError("Dirichlet problem needs interior vertices (level >= 1)",
                          {"level": pair.graph.level})
    return free


def solve_spectrum(pair: LaplacianPair, kind: Kind = "dirichlet", k: Optional[int] = None) -> SpectralReport:
    """
    Eigenpairs of L u = lambda M u through the symmetric matrix M^{-1/2} L M^{-1/2}.

    Dirichlet eigenvectors vanish on V_0. Eigenvectors are M-orthonormal and
    stored as columns of full-level arrays.
    """
    ids = _free_ids(pair, kind)
    if k is not None and not (1 <= k <= ids.size):
        raise DomainError("k must be between 1 and the number of free vertices",
                          {"k": k, "free": int(ids.size)})

    L = pair.stiffness[ids][:, ids].toarray()
    d = 1.0 / np.sqrt(pair.mass[ids])
    A = d[:, None] * L * d[None, :]
    subset = None if k is None else [0, k - 1]
    values, vectors = linalg.eigh(A, subset_by_index=subset)

    scale = np.abs(L).sum(axis=1).max()
    values = np.where((values < 0) & (values > -1e-9 * scale), 0.0, values)

    local = d[:, None] * vectors
    M = pair.mass[ids]
    residuals = np.linalg.norm(L @ local - (M[:, None] * local) * values[None, :], axis=0)

    full = np.zeros((pair.graph.vertex_count, local.shape[1]))
    full[ids] = local
    logger.info(
        f"📈 Level {pair.graph.level} {kind}: {len(values)} eigenvalues, "
        f"lowest {values[:3].round(6).tolist()}"
    )
    return SpectralReport(
        level=pair.graph.level,
        kind=kind,
        eigenvalues=values.tolist(),
        eigenvectors=full,
        eigen_residuals=residuals.tolist(),
    )


def pointwise_laplacian(pair: LaplacianPair, u: Sequence[float], x: int) -> float:
    """(1 / mass(x)) sum_{y ~ x} c(x,y)(u(y) - u(x)) at a non-boundary vertex."""
    if x in pair.boundary_ids:
        raise DomainError("pointwise Laplacian is defined off V_0", {"vertex": x})
    flux = pair.stiffness[x] @ np.asarray(u, dtype=float)
    return float(-np.ravel(flux)[0] / pair.mass[x])


def _m_norm(mass: np.ndarray, v: np.ndarray) -> float:
    return float(np.sqrt(np.sum(mass * v * v)))


def spectral_map_report(
    table: GluingTable,
    model: ConductanceModel,
    m: int,
    k: int,
) -> SpectralReport:
    """
    Lowest k Dirichlet eigenpairs at level m with diagnostics for u o R as an
    approximate eigenfunction with eigenvalue rho * lambda one level up.

    The diagnostics only converge in the limit; the energy defects are exact
    up to rounding.
    """
    if m < 1:
        raise DomainError("spectral mapping needs m >= 1", {"level": m})
    coarse = build_level(table, m)
    fine = build_level(table, m + 1)
    coarse_pair = assemble(coarse, model)
    fine_pair = assemble(fine, model)
    report = solve_spectrum(coarse_pair, "dirichlet", k)
    fine_spectrum = np.array(solve_spectrum(fine_pair, "dirichlet").eigenvalues)

    rho = float(model.energy_factor)
    R = dynamics_map(table, fine, coarse)
    interior = fine.interior
    map_residuals, distances, energy_defects = [], [], []
    for j, lam in enumerate(report.eigenvalues):
        u = report.eigenvectors[:, j]
        v = u[R]
        target = rho * lam
        r = (fine_pair.stiffness @ v - target * fine_pair.mass * v)[interior]
        map_residuals.append(
            float(np.sqrt(np.sum(r * r / fine_pair.mass[interior]))) / _m_norm(fine_pair.mass, v)
        )
        distances.append(float(np.min(np.abs(fine_spectrum - target)) / target))
        before = float(u @ (coarse_pair.stiffness @ u))
        after = float(v @ (fine_pair.stiffness @ v))
        energy_defects.append(abs(after - rho * before) / (rho * before))

    extrapolated = _extrapolated_distances(table, model, m, coarse_pair, fine_spectrum, rho, k)
    logger.info(f"📈 Spectral map level {m}->{m + 1}: distances {np.round(distances, 4).tolist()}")
    if extrapolated:
        logger.info(f"📈 Extrapolated distances {np.round(extrapolated, 6).tolist()}")
    return report.model_copy(
        update={
            "map_residuals": map_residuals,
            "spectrum_distances": distances,
            "energy_defects": energy_defects,
            "extrapolated_distances": extrapolated,
        }
    )


def _extrapolated_distances(
    table: GluingTable,
    model: ConductanceModel,
    m: int,
    coarse_pair: LaplacianPair,
    fine_spectrum: np.ndarray,
    rho: float,
    k: int,
) -> List[float]:
    """
    Matched distances after extrapolating over one level. lambda_j is
    extrapolated from levels m-1 and m; its match is the eigenvalue nearest
    rho * lambda_j one level up, extrapolated from the same pair of steps.
    Empty when m = 1.
    """
    previous = build_level(table, m - 1)
    if previous.interior.size == 0:
        return []
    earlier = np.array(solve_spectrum(assemble(previous, model), "dirichlet").eigenvalues)
    current = np.array(solve_spectrum(coarse_pair, "dirichlet").eigenvalues)

    distances = []
    for j in range(min(k, earlier.size)):
        match_coarse = current[np.argmin(np.abs(current - rho * earlier[j]))]
        match_fine = fine_spectrum[np.argmin(np.abs(fine_spectrum - rho * current[j]))]
        target = rho * richardson_extrapolate(earlier[j], current[j])
        limit = richardson_extrapolate(match_coarse, match_fine)
        distances.append(float(abs(limit - target) / target))
    return distances


def richardson_extrapolate(coarse, fine, ratio: float = 5.0):
    """Two-level extrapolation assuming differences shrink by `ratio` per level."""
    coarse = np.asarray(coarse, dtype=float)
    fine = np.asarray(fine, dtype=float)
    return fine + (fine - coarse) / (ratio - 1.0)


def eigenvalue_sequences(
    table: GluingTable,
    model: ConductanceModel,
    levels: Sequence[int],
    k: int,
    kind: Kind = "dirichlet",
) -> np.ndarray:
    """Row i holds the k lowest eigenvalues at levels[i]."""
    rows = []
    for level in levels:
        pair = assemble(build_level(table, level), model)
        rows.append(solve_spectrum(pair, kind, k).eigenvalues)
    return np.array(rows)
