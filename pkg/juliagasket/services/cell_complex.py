"""
Combinatorial gasket levels built from a gluing table.

A level-m vertex is an equivalence class of addresses (word, a): the point
F_{w_1} ... F_{w_m} q_a. R acts by deleting the first letter of the word.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy.cluster.hierarchy import DisjointSet

from juliagasket.core.exceptions import DomainError, StructuralError
from juliagasket.schemas.gluing import GluingTable

logger = logging.getLogger(__name__)

Word = Tuple[int, ...]
Address = Tuple[Word, int]


class Edge(NamedTuple):
    head: int
    tail: int
    word: Word
    base: int  # index into table.level0_edges


class Cell(NamedTuple):
    word: Word
    vertices: Tuple[int, ...]


@dataclass(frozen=True)
class LevelGraph:
    """Vertices, edges and cells of the level-m graph approximation."""

    level: int
    N: int
    B: int
    vertices: List[Address]
    edges: List[Edge]
    cells: List[Cell]
    boundary: List[int]
    address_index: Dict[Address, int] = field(repr=False)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([e.head for e in self.edges], dtype=int)

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([e.tail for e in self.edges], dtype=int)

    @cached_property
    def base_edges(self) -> np.ndarray:
        return np.array([e.base for e in self.edges], dtype=int)

    @cached_property
    def words(self) -> np.ndarray:
        """Edge provenance words as an (E, level) integer array."""
        return np.array([e.word for e in self.edges], dtype=int).reshape(len(self.edges), self.level)

    @cached_property
    def interior(self) -> np.ndarray:
        mask = np.ones(self.vertex_count, dtype=bool)
        mask[self.boundary] = False
        return np.flatnonzero(mask)

    def vertex_id(self, address: Address) -> int:
        return self.address_index[address]


def format_address(address: Address) -> str:
    """Printable address, e.g. '012.1' for word (0,1,2) and index 1."""
    word, index = address
    return "".join(str(letter) for letter in word) + "." + str(index)


def sg_dynamical_gluing() -> GluingTable:
    """
    Gluing of the Sierpinski gasket under the dynamical maps
    F0, F1 o omega^2, F2 o omega on the triangle q_j = omega^j.
    """
    return GluingTable(
        N=3,
        B=3,
        glue_pairs=[((0, 1), (1, 1)), ((0, 2), (2, 2)), ((1, 0), (2, 0))],
        boundary_lift=[(0, 0), (1, 2), (2, 1)],
        boundary_dynamics=[0, 2, 1],
        level0_edges=[(0, 1), (0, 2), (1, 2)],
    )


def validate_table(table: GluingTable) -> None:
    """
    Raise StructuralError unless the table is internally consistent.

    R must be well defined on glued slots, so glued slots carry the same
    boundary index.
    """
    slots = set()
    for (i, a), (j, b) in table.glue_pairs:
        if not (0 <= i < j < table.N) or not (0 <= a < table.B and 0 <= b < table.B):
            raise StructuralError("glue pair out of range or not ordered i < j",
                                  {"pair": [[i, a], [j, b]]})
        if a != b:
            raise StructuralError("glued slots must share the boundary index for R to be well defined",
                                  {"pair": [[i, a], [j, b]]})
        for slot in ((i, a), (j, b)):
            if slot in slots:
                raise StructuralError("slot glued twice", {"slot": list(slot)})
            slots.add(slot)

    if len(table.boundary_lift) != table.B or len(table.boundary_dynamics) != table.B:
        raise StructuralError("boundary tables must have B entries", {"B": table.B})
    if len(set(table.boundary_lift)) != table.B:
        raise StructuralError("boundary_lift is not injective")
    for v, (t, a) in enumerate(table.boundary_lift):
        if (t, a) in slots:
            raise StructuralError("boundary vertex lifts onto a glued slot", {"vertex": v})
        if table.boundary_dynamics[v] != a:
            raise StructuralError("boundary_dynamics must undo the lift letter",
                                  {"vertex": v, "lift": [t, a], "dynamics": table.boundary_dynamics[v]})
    for a, b in table.level0_edges:
        if not (0 <= a < b < table.B):
            raise StructuralError("level-0 edge must be a sorted in-range pair", {"edge": [a, b]})


def boundary_address(table: GluingTable, a: int, depth: int) -> Address:
    """Address of q_a inside a level-`depth` graph, via the lift chain."""
    word = []
    index = a
    for _ in range(depth):
        t, index = table.boundary_lift[index]
        word.append(t)
    return tuple(word), index


def _words(N: int, length: int) -> List[Word]:
    if length == 0:
        return [()]
    shorter = _words(N, length - 1)
    return [w + (i,) for w in shorter for i in range(N)]


def build_level(table: GluingTable, m: int) -> LevelGraph:
    """
    Level-m graph: N^m copies of the level-0 graph, identified by applying
    the glue pairs at every depth.

    Raises:
        DomainError: m < 0
        StructuralError: the table merges two boundary vertices of one tile
    """
    if m < 0:
        raise DomainError("level must be nonnegative", {"level": m})
    validate_table(table)

    words = _words(table.N, m)
    addresses = [(w, a) for w in words for a in range(table.B)]
    classes = DisjointSet(addresses)

    for depth in range(m):
        tail = m - depth - 1
        for prefix in _words(table.N, depth):
            for (i, a), (j, b) in table.glue_pairs:
                word_a, index_a = boundary_address(table, a, tail)
                word_b, index_b = boundary_address(table, b, tail)
                classes.merge((prefix + (i,) + word_a, index_a), (prefix + (j,) + word_b, index_b))

    canonical = sorted(min(subset) for subset in classes.subsets())
    ids = {address: k for k, address in enumerate(canonical)}
    address_index = {address: ids[min(classes.subset(address))] for address in addresses}

    cells = []
    for w in words:
        corners = tuple(address_index[(w, a)] for a in range(table.B))
        if len(set(corners)) != table.B:
            raise StructuralError("gluing identified two corners of one cell",
                                  {"word": list(w), "corners": list(corners)})
        cells.append(Cell(w, corners))

    edges = [
        Edge(address_index[(w, a)], address_index[(w, b)], w, e)
        for w in words
        for e, (a, b) in enumerate(table.level0_edges)
    ]
    boundary = [address_index[boundary_address(table, a, m)] for a in range(table.B)]

    logger.info(f"📊 Level {m}: {len(canonical)} vertices, {len(edges)} edges, {len(cells)} cells")
    return LevelGraph(
        level=m,
        N=table.N,
        B=table.B,
        vertices=canonical,
        edges=edges,
        cells=cells,
        boundary=boundary,
        address_index=address_index,
    )


def apply_R(table: GluingTable, graph: LevelGraph, previous: LevelGraph, v: int) -> int:
    """
    Image under R of vertex v of level m+1, as a vertex id of level m.

    Raises:
        DomainError: v is a level-0 vertex (no letter to strip)
    """
    if graph.level == 0:
        raise DomainError("R needs an address with at least one letter", {"vertex": v})
    word, index = graph.vertices[v]
    return previous.address_index[(word[1:], index)]


def dynamics_map(table: GluingTable, graph: LevelGraph, previous: LevelGraph) -> np.ndarray:
    """apply_R for every vertex of `graph` at once."""
    if previous.level != graph.level - 1:
        raise DomainError("dynamics_map needs consecutive levels",
                          {"levels": [previous.level, graph.level]})
    return np.array([apply_R(table, graph, previous, v) for v in range(graph.vertex_count)], dtype=int)


def embedding_map(table: GluingTable, coarse: LevelGraph, fine: LevelGraph) -> np.ndarray:
    """Ids in `fine` of the vertices of `coarse` (V_{m-1} inside V_m)."""
    if fine.level != coarse.level + 1:
        raise DomainError("embedding_map needs consecutive levels",
                          {"levels": [coarse.level, fine.level]})
    result = np.empty(coarse.vertex_count, dtype=int)
    for v, (word, index) in enumerate(coarse.vertices):
        t, a = table.boundary_lift[index]
        result[v] = fine.address_index[(word + (t,), a)]
    return result


def pullback(table: GluingTable, graph: LevelGraph, previous: LevelGraph, u: Sequence) -> np.ndarray:
    """u o R on the finer level, for u given on `previous`."""
    values = np.asarray(u)
    if len(values) != previous.vertex_count:
        raise DomainError("function length does not match the level",
                          {"expected": previous.vertex_count, "got": len(values)})
    return values[dynamics_map(table, graph, previous)]


def check_consistency(table: GluingTable, graph: LevelGraph, previous: LevelGraph) -> None:
    """
    Raise StructuralError unless every address of each vertex has the same
    image under R.
    """
    images: Dict[int, int] = {}
    for (word, index), v in graph.address_index.items():
        target = previous.address_index[(word[1:], index)]
        if images.setdefault(v, target) != target:
            raise StructuralError("R is not well defined on a glued vertex",
                                  {"vertex": format_address(graph.vertices[v])})
