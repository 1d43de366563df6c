"""
Numeric realization of the gasket levels in the plane.

V_0 is the post-critical set, ordered by argument. Level m+1 coordinates
are preimages of level-m coordinates, one per tile, where tile i is the
angular sector between consecutive critical points counted
counterclockwise from the sector holding q_0.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from juliagasket.core.config import settings
from juliagasket.core.exceptions import (
    ConsistencyError,
    DomainError,
    EmbeddingError,
    InferenceError,
    StructuralError,
)
from juliagasket.schemas.gluing import GluingTable
from juliagasket.schemas.map_spec import MapSpec
from juliagasket.schemas.render import RenderConfig
from juliagasket.services.cell_complex import LevelGraph, build_level, embedding_map, validate_table
from juliagasket.services.preimage_solver import solve_preimages
from juliagasket.services.rational_map import (
    argument_01,
    classify,
    critical_points,
    escape_radius,
    evaluate,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddedLevel:
    """Coordinates of every canonical vertex of one level."""

    level: int
    graph: LevelGraph
    coords: np.ndarray
    tolerance: float

    def coordinate(self, v: int) -> complex:
        return complex(self.coords[v])


@dataclass(frozen=True)
class TileSectors:
    """Critical-point arguments cutting the plane into N tile sectors."""

    critical: List[complex]
    bounds: np.ndarray  # ascending arguments in [0, 2pi)
    first_arc: int  # arc holding q_0

    @property
    def count(self) -> int:
        return len(self.critical)

    def arc_to_tile(self, arc: int) -> int:
        return (arc - self.first_arc) % self.count


@dataclass(frozen=True)
class LevelOneStructure:
    """Tile images F_i(q_a) of the boundary points, computed numerically."""

    boundary: List[complex]
    tiles: np.ndarray  # (N, B) complex, tiles[i, a] = F_i(q_a)
    critical_points: List[complex]
    glue_points: List[complex]
    extra_points: List[complex]


def _arc_of(angle: float, bounds: np.ndarray) -> int:
    j = int(np.searchsorted(bounds, angle, side="right")) - 1
    return j if j >= 0 else len(bounds) - 1


def _angular_gap(a: float, b: float) -> float:
    gap = abs(a - b) % (2.0 * np.pi)
    return min(gap, 2.0 * np.pi - gap)


def tile_sectors(spec: MapSpec, q0: complex) -> TileSectors:
    crit = sorted(critical_points(spec), key=argument_01)
    bounds = np.array([argument_01(c) for c in crit])
    first = _arc_of(argument_01(q0), bounds)
    if min(_angular_gap(argument_01(q0), b) for b in bounds) <= settings.SECTOR_TIE_TOL:
        raise EmbeddingError("q_0 lies on a sector boundary", {"q0": [q0.real, q0.imag]})
    return TileSectors(critical=crit, bounds=bounds, first_arc=first)


def assign_branches(
    sectors: TileSectors,
    roots: Sequence[complex],
    glue_tol: float = None,
    tie_tol: float = None,
) -> List[complex]:
    """
    One preimage per tile. A root on a critical point belongs to both
    sectors it separates.

    Raises:
        EmbeddingError: a root sits on a sector boundary away from a critical
            point, or a tile receives zero or several roots
    """
    glue_tol = settings.GLUE_TOL if glue_tol is None else glue_tol
    tie_tol = settings.SECTOR_TIE_TOL if tie_tol is None else tie_tol
    N = sectors.count
    chosen: List[List[complex]] = [[] for _ in range(N)]

    for p in roots:
        hit = next((k for k, c in enumerate(sectors.critical) if abs(p - c) <= glue_tol), None)
        if hit is not None:
            for arc in ((hit - 1) % N, hit):
                chosen[sectors.arc_to_tile(arc)].append(p)
            continue
        angle = argument_01(p)
        if min(_angular_gap(angle, b) for b in sectors.bounds) <= tie_tol:
            raise EmbeddingError(
                "preimage is equidistant to two tile sectors",
                {"root": [p.real, p.imag], "argument": angle},
            )
        chosen[sectors.arc_to_tile(_arc_of(angle, sectors.bounds))].append(p)

    bad = [i for i, hits in enumerate(chosen) if len(hits) != 1]
    if bad:
        raise EmbeddingError(
            "branch assignment did not give one preimage per tile",
            {
                "tiles": bad,
                "roots": [[p.real, p.imag] for p in roots],
            },
        )
    return [hits[0] for hits in chosen]


def boundary_points(spec: MapSpec, B: Optional[int] = None) -> List[complex]:
    """
    V_0: the post-critical set ordered by argument in [0, 2pi).

    Raises:
        EmbeddingError: two points share an argument (the boundary curve is not
            star-shaped about 0), or the count differs from B
    """
    report = classify(spec)
    points = list(report.post_critical_set)
    angles = sorted(argument_01(z) for z in points)
    for a, b in zip(angles, angles[1:]):
        if b - a <= settings.EMBED_TOL:
            raise EmbeddingError(
                "post-critical points share an argument; boundary is not star-shaped about 0",
                {"arguments": angles},
            )
    if B is not None and len(points) != B:
        raise EmbeddingError(
            f"post-critical set has {len(points)} points, table expects {B}",
            {"points": [[z.real, z.imag] for z in points]},
        )
    return points


def level_one(spec: MapSpec, glue_tol: float = None) -> LevelOneStructure:
    """Compute F_i(q_a) for every tile i and boundary index a."""
    glue_tol = settings.GLUE_TOL if glue_tol is None else glue_tol
    boundary = boundary_points(spec)
    sectors = tile_sectors(spec, boundary[0])
    tiles = np.empty((spec.N, len(boundary)), dtype=complex)
    for a, q in enumerate(boundary):
        pre = solve_preimages(spec, q)
        tiles[:, a] = assign_branches(sectors, pre.points, glue_tol)

    glue = [c for c in sectors.critical if np.sum(np.abs(tiles - c) <= glue_tol) >= 2]
    extra = []
    for z in tiles.ravel():
        known = boundary + sectors.critical + extra
        if all(abs(z - w) > glue_tol for w in known):
            extra.append(complex(z))
    return LevelOneStructure(
        boundary=boundary,
        tiles=tiles,
        critical_points=sectors.critical,
        glue_points=glue,
        extra_points=sorted(extra, key=argument_01),
    )


def _index_of(points: Sequence[complex], z: complex, tol: float) -> List[int]:
    return [k for k, w in enumerate(points) if abs(w - z) <= tol]


def infer_gluing(spec: MapSpec, tol: float = None) -> GluingTable:
    """
    Gluing table read off from the numeric level-1 structure.

    Raises:
        InferenceError: the map is not Misiurewicz, or a boundary point has
            no unique tile lift or image
    """
    tol = settings.GLUE_TOL if tol is None else tol
    report = classify(spec)
    if not report.is_misiurewicz:
        raise InferenceError("gluing inference needs a Misiurewicz map",
                             {"periods": report.periods, "mu_min": report.mu_min})
    try:
        structure = level_one(spec, tol)
    except EmbeddingError as e:
        raise InferenceError(f"tile partition failed: {e.message}", e.detail) from e

    N, B = structure.tiles.shape
    slots = [(i, a) for i in range(N) for a in range(B)]

    glue_pairs = []
    for k, (i, a) in enumerate(slots):
        for j, b in slots[k + 1:]:
            if i < j and abs(structure.tiles[i, a] - structure.tiles[j, b]) <= tol:
                glue_pairs.append(((i, a), (j, b)))

    boundary_lift = []
    boundary_dynamics = []
    for v, q in enumerate(structure.boundary):
        lifts = [s for s in slots if abs(structure.tiles[s] - q) <= tol]
        images = _index_of(structure.boundary, evaluate(spec, q), tol)
        if len(lifts) != 1 or len(images) != 1:
            raise InferenceError(
                "boundary point has no unique lift or image",
                {"vertex": v, "lifts": [list(s) for s in lifts], "images": images},
            )
        boundary_lift.append(lifts[0])
        boundary_dynamics.append(images[0])

    level0_edges = sorted({tuple(sorted((k, (k + 1) % B))) for k in range(B)})
    table = GluingTable(
        N=N,
        B=B,
        glue_pairs=glue_pairs,
        boundary_lift=boundary_lift,
        boundary_dynamics=boundary_dynamics,
        level0_edges=level0_edges,
    )
    try:
        validate_table(table)
    except StructuralError as e:
        raise InferenceError(f"inferred table is inconsistent: {e.message}", e.detail) from e

    logger.info(
        f"🔍 Inferred gluing: N={N}, B={B}, {len(glue_pairs)} glue pairs, "
        f"{len(structure.extra_points)} extra level-1 points"
    )
    return table


def embed_vertices(
    spec: MapSpec,
    table: GluingTable,
    m: int,
    tol: float = None,
) -> EmbeddedLevel:
    """
    Coordinates of V_m, level by level from V_0.

    Raises:
        DomainError: m < 0 or the table does not fit the map
        EmbeddingError: branch assignment failed
        ConsistencyError: glued addresses or the embedded V_{m-1} disagree
    """
    tol = settings.EMBED_TOL if tol is None else tol
    if m < 0:
        raise DomainError("level must be nonnegative", {"level": m})
    if table.N != spec.N:
        raise DomainError("table and map have different degrees", {"table": table.N, "map": spec.N})

    boundary = boundary_points(spec, table.B)
    for v, q in enumerate(boundary):
        image = evaluate(spec, q)
        if abs(image - boundary[table.boundary_dynamics[v]]) > tol * (1.0 + abs(q)):
            raise ConsistencyError(
                "boundary_dynamics disagrees with R on V_0",
                {"vertex": v, "image": [image.real, image.imag]},
            )

    sectors = tile_sectors(spec, boundary[0])
    previous = EmbeddedLevel(0, build_level(table, 0), np.array(boundary, dtype=complex), tol)
    for level in range(1, m + 1):
        previous = _next_level(spec, table, sectors, previous, level, tol)
    return previous


def _next_level(
    spec: MapSpec,
    table: GluingTable,
    sectors: TileSectors,
    previous: EmbeddedLevel,
    level: int,
    tol: float,
) -> EmbeddedLevel:
    graph = build_level(table, level)
    branches: Dict[int, List[complex]] = {}
    coords = np.full(graph.vertex_count, np.nan, dtype=complex)

    for (word, index), v in graph.address_index.items():
        parent = previous.graph.address_index[(word[1:], index)]
        if parent not in branches:
            pre = solve_preimages(spec, previous.coords[parent])
            branches[parent] = assign_branches(sectors, pre.points)
        z = branches[parent][word[0]]
        if np.isnan(coords[v]):
            coords[v] = z
        elif abs(coords[v] - z) > settings.GLUE_TOL:
            raise ConsistencyError(
                "glued addresses landed on different points",
                {"level": level, "vertex": v, "distance": abs(coords[v] - z)},
            )

    inherited = embedding_map(table, previous.graph, graph)
    drift = np.abs(coords[inherited] - previous.coords)
    if drift.size and drift.max() > tol * (1.0 + np.abs(previous.coords).max()):
        raise ConsistencyError(
            "embedded V_{m-1} moved between levels",
            {"level": level, "max_drift": float(drift.max())},
        )

    logger.info(f"📍 Embedded level {level}: {graph.vertex_count} points from {len(branches)} preimage solves")
    return EmbeddedLevel(level, graph, coords, tol)


def dynamics_defect(spec: MapSpec, fine: EmbeddedLevel, coarse: EmbeddedLevel) -> float:
    """max |R(coord(v)) - coord(apply_R(v))| over the finer level."""
    worst = 0.0
    for v, (word, index) in enumerate(fine.graph.vertices):
        target = coarse.coords[coarse.graph.address_index[(word[1:], index)]]
        worst = max(worst, abs(evaluate(spec, fine.coords[v]) - target))
    return worst


def rotation_defect(spec: MapSpec, level: EmbeddedLevel) -> float:
    """Largest distance from omega_N * z to the nearest vertex, over all vertices."""
    rotated = spec.omega_N * level.coords
    distances = np.abs(rotated[:, None] - level.coords[None, :])
    return float(distances.min(axis=1).max())


def pixel_grid(cfg: RenderConfig) -> np.ndarray:
    """Complex pixel centers; row 0 is the top edge (largest imaginary part)."""
    re_min, re_max, im_min, im_max = cfg.window
    re = np.linspace(re_min, re_max, cfg.width)
    im = np.linspace(im_max, im_min, cfg.height)
    return re[None, :] + 1j * im[:, None]


def escape_counts(spec: MapSpec, z: np.ndarray, max_iter: int, radius: float) -> np.ndarray:
    """
    Escape time per point: 0 if it starts outside the radius, k if the k-th
    iterate leaves it or hits infinity, max_iter if it never does.
    """
    z = np.array(z, dtype=complex)
    counts = np.full(z.shape, max_iter, dtype=np.int64)
    alive = np.abs(z) <= radius
    counts[~alive] = 0

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for k in range(1, max_iter + 1):
            if not alive.any():
                break
            current = z[alive]
            image = current ** spec.n + spec.lam / current ** spec.m
            gone = (current == 0) | ~np.isfinite(image) | (np.abs(image) > radius)
            idx = np.flatnonzero(alive)
            counts.flat[idx[gone]] = k
            z.flat[idx] = image
            alive.flat[idx[gone]] = False
    return counts


def render(spec: MapSpec, cfg: RenderConfig) -> np.ndarray:
    """Escape-time field over the configured window."""
    counts = escape_counts(spec, pixel_grid(cfg), cfg.max_iter, cfg.escape_radius)
    logger.info(
        f"🖼️ Rendered {cfg.width}x{cfg.height}: "
        f"{int(np.sum(counts == cfg.max_iter))} non-escaping pixels"
    )
    return counts


def to_image(counts: np.ndarray, max_iter: int) -> Image.Image:
    """Grayscale image, one byte per pixel: round(255 * count / max_iter)."""
    scaled = np.rint(255.0 * counts / max_iter).astype(np.uint8)
    return Image.fromarray(scaled, mode="L")


def render_config(
    spec: MapSpec,
    width: int = None,
    height: int = None,
    max_iter: int = None,
    window: Tuple[float, float, float, float] = None,
) -> RenderConfig:
    """RenderConfig with settings defaults and the map's escape radius."""
    return RenderConfig(
        window=settings.render_window if window is None else window,
        width=settings.RENDER_WIDTH if width is None else width,
        height=settings.RENDER_HEIGHT if height is None else height,
        max_iter=settings.RENDER_MAX_ITER if max_iter is None else max_iter,
        escape_radius=escape_radius(spec),
    )
