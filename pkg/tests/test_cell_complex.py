"""
Tests for gluing tables, level graphs and the address shift R.
"""
from collections import Counter

import numpy as np
import pytest

from juliagasket.core.exceptions import DomainError, StructuralError
from juliagasket.schemas.gluing import GluingTable
from juliagasket.services import cell_complex


@pytest.fixture(scope="module")
def table():
    return cell_complex.sg_dynamical_gluing()


@pytest.fixture(scope="module")
def quartic_table():
    return GluingTable(
        N=4,
        B=4,
        glue_pairs=[((0, 1), (1, 1)), ((0, 3), (3, 3)), ((1, 3), (2, 3)), ((2, 1), (3, 1))],
        boundary_lift=[(0, 0), (1, 2), (2, 0), (3, 2)],
        boundary_dynamics=[0, 2, 0, 2],
        level0_edges=[(0, 1), (0, 3), (1, 2), (2, 3)],
    )


def test_sg_table_is_valid(table):
    cell_complex.validate_table(table)
    assert table.boundary_dynamics == [0, 2, 1]


@pytest.mark.parametrize("m", range(8))
def test_sg_counts(table, m):
    """|V_m| = (3^{m+1} + 3) / 2 and |E_m| = 3^{m+1}."""
    graph = cell_complex.build_level(table, m)
    assert graph.vertex_count == (3 ** (m + 1) + 3) // 2
    assert len(graph.edges) == 3 ** (m + 1)
    assert len(graph.cells) == 3 ** m
    assert all(len(cell.vertices) == 3 for cell in graph.cells)


def test_level_one_structure(table):
    graph = cell_complex.build_level(table, 1)
    assert graph.vertex_count == 6
    assert len(graph.edges) == 9
    assert len(graph.interior) == 3


def test_build_level_is_deterministic(table):
    first = cell_complex.build_level(table, 3)
    second = cell_complex.build_level(table, 3)
    assert first.vertices == second.vertices
    assert first.edges == second.edges


@pytest.mark.parametrize("m", range(5))
def test_three_edges_over_each_edge(table, m):
    """Every level-m edge is the image of exactly three level-(m+1) edges."""
    coarse = cell_complex.build_level(table, m)
    fine = cell_complex.build_level(table, m + 1)
    R = cell_complex.dynamics_map(table, fine, coarse)
    coarse_edges = {(e.word, e.base): {e.head, e.tail} for e in coarse.edges}
    hits = Counter()
    for e in fine.edges:
        key = (e.word[1:], e.base)
        assert {R[e.head], R[e.tail]} == coarse_edges[key]
        hits[key] += 1
    assert set(hits.values()) == {3}
    assert len(hits) == len(coarse.edges)


@pytest.mark.parametrize("m", range(4))
def test_shift_is_well_defined(table, m):
    """All addresses of a vertex have the same image."""
    coarse = cell_complex.build_level(table, m)
    fine = cell_complex.build_level(table, m + 1)
    cell_complex.check_consistency(table, fine, coarse)


def test_boundary_two_cycle(table):
    """q_1 maps to q_2 and q_0 is fixed."""
    coarse = cell_complex.build_level(table, 2)
    fine = cell_complex.build_level(table, 3)
    assert cell_complex.apply_R(table, fine, coarse, fine.boundary[1]) == coarse.boundary[2]
    assert cell_complex.apply_R(table, fine, coarse, fine.boundary[2]) == coarse.boundary[1]
    assert cell_complex.apply_R(table, fine, coarse, fine.boundary[0]) == coarse.boundary[0]


def test_apply_R_needs_a_letter(table):
    level0 = cell_complex.build_level(table, 0)
    with pytest.raises(DomainError):
        cell_complex.apply_R(table, level0, level0, 0)


def test_pullback_constant(table):
    coarse = cell_complex.build_level(table, 2)
    fine = cell_complex.build_level(table, 3)
    pulled = cell_complex.pullback(table, fine, coarse, np.ones(coarse.vertex_count))
    assert np.all(pulled == 1)


def test_pullback_indicator(table):
    """The indicator of q_0 pulls back to q_0 and the critical vertex over it."""
    coarse = cell_complex.build_level(table, 0)
    fine = cell_complex.build_level(table, 1)
    pulled = cell_complex.pullback(table, fine, coarse, [1, 0, 0])
    support = set(np.flatnonzero(pulled).tolist())
    assert support == {fine.boundary[0], fine.vertex_id(((1,), 0))}
    assert fine.vertex_id(((2,), 0)) == fine.vertex_id(((1,), 0))


def test_pullback_length_mismatch(table):
    coarse = cell_complex.build_level(table, 0)
    fine = cell_complex.build_level(table, 1)
    with pytest.raises(DomainError):
        cell_complex.pullback(table, fine, coarse, [1, 0])


@pytest.mark.parametrize("m", range(1, 5))
def test_embedding_keeps_boundary(table, m):
    coarse = cell_complex.build_level(table, m - 1)
    fine = cell_complex.build_level(table, m)
    inclusion = cell_complex.embedding_map(table, coarse, fine)
    assert len(set(inclusion.tolist())) == coarse.vertex_count
    assert [inclusion[b] for b in coarse.boundary] == fine.boundary


def test_embedding_commutes_with_boundary_dynamics(table):
    """R on the embedded V_0 is the boundary dynamics."""
    coarse = cell_complex.build_level(table, 0)
    fine = cell_complex.build_level(table, 1)
    inclusion = cell_complex.embedding_map(table, coarse, fine)
    R = cell_complex.dynamics_map(table, fine, coarse)
    assert [int(R[inclusion[v]]) for v in range(3)] == table.boundary_dynamics


def test_mismatched_glue_indices_rejected(table):
    bad = table.model_copy(update={"glue_pairs": [((0, 1), (1, 2)), ((0, 2), (2, 2)), ((1, 0), (2, 0))]})
    with pytest.raises(StructuralError):
        cell_complex.validate_table(bad)


def test_bad_boundary_dynamics_rejected(table):
    bad = table.model_copy(update={"boundary_dynamics": [0, 1, 2]})
    with pytest.raises(StructuralError):
        cell_complex.build_level(bad, 1)


def test_negative_level_rejected(table):
    with pytest.raises(DomainError):
        cell_complex.build_level(table, -1)


def test_quartic_table_levels(quartic_table):
    """Four tiles of a square boundary, glued at the four critical points."""
    level1 = cell_complex.build_level(quartic_table, 1)
    assert level1.vertex_count == 12
    assert len(level1.edges) == 16
    level2 = cell_complex.build_level(quartic_table, 2)
    assert level2.vertex_count == 4 * 12 - 4


def test_format_address():
    assert cell_complex.format_address(((0, 1, 2), 1)) == "012.1"
