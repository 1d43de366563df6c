"""
Tests for embedding gasket levels in the plane, gluing inference and rendering.
"""
import cmath
import math

import numpy as np
import pytest

from juliagasket.core.exceptions import ConsistencyError, DomainError, EmbeddingError
from juliagasket.schemas.map_spec import MapSpec
from juliagasket.schemas.render import RenderConfig
from juliagasket.services import cell_complex, geometry, rational_map
from juliagasket.services.export_service import export_service

OMEGA = cmath.exp(2j * math.pi / 3)


@pytest.fixture(scope="module")
def sg():
    return MapSpec.sierpinski()


@pytest.fixture(scope="module")
def table():
    return cell_complex.sg_dynamical_gluing()


@pytest.fixture(scope="module")
def quartic():
    return rational_map.refine_parameter(MapSpec(n=2, m=2, lam=-0.36428), preperiod=3, period=1)


def test_boundary_points(sg):
    points = geometry.boundary_points(sg, 3)
    expected = [4 / 3, 4 / 3 * OMEGA, 4 / 3 * OMEGA ** 2]
    assert np.allclose(points, expected, atol=1e-9)


def test_boundary_count_mismatch(sg):
    with pytest.raises(EmbeddingError):
        geometry.boundary_points(sg, 4)


def test_level_zero_is_boundary(sg, table):
    level = geometry.embed_vertices(sg, table, 0)
    assert np.allclose(level.coords, geometry.boundary_points(sg), atol=1e-12)


def test_critical_points_enter_at_level_one(sg, table):
    """The three level-1 junctions are the critical points of R."""
    level = geometry.embed_vertices(sg, table, 1)
    for c in rational_map.critical_points(sg):
        assert np.min(np.abs(level.coords - c)) <= 1e-8
    assert abs(level.coordinate(level.graph.vertex_id(((1,), 0))) - (-2 / 3)) <= 1e-8


@pytest.mark.parametrize("m", range(6))
def test_embedded_counts_and_distinct(sg, table, m):
    level = geometry.embed_vertices(sg, table, m)
    assert len(level.coords) == (3 ** (m + 1) + 3) // 2
    gaps = np.abs(level.coords[:, None] - level.coords[None, :])
    np.fill_diagonal(gaps, np.inf)
    assert gaps.min() > 1e-6


@pytest.mark.parametrize("m", range(1, 4))
def test_dynamics_defect(sg, table, m):
    fine = geometry.embed_vertices(sg, table, m)
    coarse = geometry.embed_vertices(sg, table, m - 1)
    assert geometry.dynamics_defect(sg, fine, coarse) <= 1e-7


@pytest.mark.parametrize("m", range(4))
def test_rotation_symmetry(sg, table, m):
    level = geometry.embed_vertices(sg, table, m)
    assert geometry.rotation_defect(sg, level) <= 1e-7


def test_embed_rejects_wrong_degree(quartic, table):
    with pytest.raises(DomainError):
        geometry.embed_vertices(quartic, table, 1)


def test_embed_rejects_wrong_boundary_dynamics(sg, table):
    bad = table.model_copy(update={"boundary_dynamics": [0, 1, 2]})
    with pytest.raises(ConsistencyError):
        geometry.embed_vertices(sg, bad, 1)


def test_infer_gluing_matches_sg(sg, table):
    inferred = geometry.infer_gluing(sg)
    assert inferred.model_dump() == table.model_dump()


def test_quartic_level_one(quartic):
    structure = geometry.level_one(quartic)
    assert len(structure.boundary) == 4
    assert len(structure.glue_points) == 4
    assert len(structure.extra_points) == 4
    assert np.allclose(np.abs(structure.extra_points), 0.5, atol=1e-3)


def test_quartic_inferred_table(quartic):
    inferred = geometry.infer_gluing(quartic)
    assert inferred.N == 4 and inferred.B == 4
    assert len(inferred.glue_pairs) == 4
    assert inferred.boundary_dynamics == [0, 2, 0, 2]
    graph = cell_complex.build_level(inferred, 1)
    assert graph.vertex_count == 12
    level = geometry.embed_vertices(quartic, inferred, 2)
    assert level.coords.shape == (graph.vertex_count * 4 - 4,)


def test_escape_counts(sg):
    counts = geometry.escape_counts(sg, np.array([3.0, 0.0, 4 / 3]), 30, 2.0)
    assert counts.tolist() == [0, 1, 30]


def test_render_small_window(sg):
    cfg = RenderConfig(window=(-4 / 3, 4 / 3, -1.0, 1.0), width=3, height=3, max_iter=30)
    counts = geometry.render(sg, cfg)
    assert counts.shape == (3, 3)
    assert counts[1, 1] == 1
    assert counts[1, 2] == 30


def test_render_is_deterministic(sg):
    cfg = geometry.render_config(sg, width=16, height=12, max_iter=20)
    assert np.array_equal(geometry.render(sg, cfg), geometry.render(sg, cfg))


def test_pixel_grid_orientation():
    cfg = RenderConfig(window=(-1.0, 1.0, -2.0, 2.0), width=2, height=2)
    grid = geometry.pixel_grid(cfg)
    assert grid[0, 0] == complex(-1.0, 2.0)
    assert grid[1, 1] == complex(1.0, -2.0)


def test_image_written_as_binary_ppm(sg, tmp_path):
    cfg = RenderConfig(window=(-2.0, 2.0, -2.0, 2.0), width=5, height=4, max_iter=10)
    image = geometry.to_image(geometry.render(sg, cfg), cfg.max_iter)
    assert image.size == (5, 4)
    assert image.mode == "L"
    path = export_service.write_ppm(image, tmp_path / "sg.ppm")
    with open(path, "rb") as handle:
        assert handle.read(2) == b"P5"


def test_to_image_scaling():
    image = geometry.to_image(np.array([[0, 5, 10]]), 10)
    assert list(image.getdata()) == [0, 128, 255]


def test_default_grid_samples_fixed_point_and_pole(sg):
    """The default 512x512 render has pixel centers at 4/3 (bounded) and 0 (escaping)."""
    cfg = geometry.render_config(sg)
    assert (cfg.width, cfg.height) == (512, 512)
    grid = geometry.pixel_grid(cfg)
    counts = geometry.render(sg, cfg)

    fixed = np.unravel_index(np.argmin(np.abs(grid - 4 / 3)), grid.shape)
    pole = np.unravel_index(np.argmin(np.abs(grid)), grid.shape)
    assert abs(grid[fixed] - 4 / 3) <= 1e-12
    assert abs(grid[pole]) <= 1e-12
    assert fixed == (256, 511)
    assert pole == (256, 255)
    assert counts[fixed] == cfg.max_iter
    assert counts[pole] < cfg.max_iter
