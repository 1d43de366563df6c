"""
Graph energies on gasket levels, harmonic extension and the dynamical
identities E_m(u o R) = N E_{m-1}(u), Ecal_m(u o R) = rho Ecal_{m-1}(u).

Functions on a level are arrays indexed by canonical vertex id. Arrays of
dtype object holding Fractions select exact arithmetic.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy import linalg, sparse
from scipy.sparse.csgraph import connected_components

from juliagasket.core.exceptions import DomainError, StructuralError
from juliagasket.schemas.gluing import GluingTable
from juliagasket.schemas.renorm import RenormSolution
from juliagasket.services.cell_complex import LevelGraph, build_level, embedding_map, pullback
from juliagasket.services.renormalization import conductances_from_shape

logger = logging.getLogger(__name__)

Number = Union[float, Fraction]


def is_exact(u) -> bool:
    values = np.asarray(u)
    return values.dtype == object and all(isinstance(x, (Fraction, int)) for x in values.ravel())


@dataclass(frozen=True)
class ConductanceModel:
    """
    Base conductances on the level-0 edges and one weight per tile.

    The edge copy with provenance word w carries base[e] / prod(weights[w_k]).
    """

    base: Tuple[Number, ...]
    weights: Tuple[Number, ...]

    def __post_init__(self):
        if any(not (x > 0) for x in self.base + self.weights):
            raise DomainError("conductances and weights must be positive",
                              {"base": [float(x) for x in self.base],
                               "weights": [float(x) for x in self.weights]})

    @classmethod
    def standard(cls, table: GluingTable) -> "ConductanceModel":
        """Unit base conductances, every weight 3/5."""
        return cls(
            base=tuple(Fraction(1) for _ in table.level0_edges),
            weights=tuple(Fraction(3, 5) for _ in range(table.N)),
        )

    @classmethod
    def from_renorm(cls, table: GluingTable, solution: RenormSolution) -> "ConductanceModel":
        """Triangle conductances of the solution's shape, weights r_tilde."""
        if table.B != 3 or table.N != 3:
            raise DomainError("renormalized models are defined on triangles with three tiles",
                              {"N": table.N, "B": table.B})
        opposite = conductances_from_shape(*solution.s)
        base = tuple(opposite[3 - a - b] for a, b in table.level0_edges)
        return cls(base=base, weights=tuple(solution.r_tilde))

    @property
    def energy_factor(self) -> Number:
        """rho = sum over tiles of 1 / weight."""
        return sum(1 / w for w in self.weights)

    def is_reflection_symmetric(self, table: GluingTable) -> bool:
        """c_1 = c_2 and r_1 = r_2, i.e. invariance under complex conjugation."""
        if table.B != 3 or table.N != 3:
            return False
        opposite = {3 - a - b: c for (a, b), c in zip(table.level0_edges, self.base)}
        return (
            abs(opposite[1] - opposite[2]) <= 1e-12 * max(opposite[1], opposite[2])
            and abs(self.weights[1] - self.weights[2]) <= 1e-12 * max(self.weights[1], self.weights[2])
        )

    def conductances(self, graph: LevelGraph, exact: bool = False) -> np.ndarray:
        """Conductance of every edge of the level."""
        if exact:
            out = []
            for edge in graph.edges:
                c = Fraction(self.base[edge.base])
                for letter in edge.word:
                    c /= Fraction(self.weights[letter])
                out.append(c)
            return np.array(out, dtype=object)
        base = np.array([float(x) for x in self.base])
        weights = np.array([float(x) for x in self.weights])
        return base[graph.base_edges] / np.prod(weights[graph.words], axis=1)

    def base_conductances(self, graph: LevelGraph, exact: bool = False) -> np.ndarray:
        if exact:
            return np.array([Fraction(self.base[e.base]) for e in graph.edges], dtype=object)
        return np.array([float(x) for x in self.base])[graph.base_edges]


@dataclass(frozen=True)
class EnergyValue:
    """raw uses base conductances only; renormalized includes tile weights."""

    level: int
    raw: Number
    renormalized: Number


@dataclass(frozen=True)
class InvarianceResidual:
    level: int
    raw: Number
    renormalized: Number
    raw_factor: int
    factor: Number


def _quadratic(graph: LevelGraph, c: np.ndarray, u: np.ndarray, v: np.ndarray) -> Number:
    du = u[graph.heads] - u[graph.tails]
    dv = v[graph.heads] - v[graph.tails]
    if c.dtype == object:
        return sum((ci * a * b for ci, a, b in zip(c, du, dv)), Fraction(0))
    return float(np.dot(c, du * dv))


def energy(graph: LevelGraph, model: ConductanceModel, u: Sequence, v: Optional[Sequence] = None) -> EnergyValue:
    """Bilinear edge sum sum c(x,y)(u(x)-u(y))(v(x)-v(y)); v defaults to u."""
    exact = is_exact(u) and (v is None or is_exact(v))
    u = np.asarray(u, dtype=object if exact else float)
    v = u if v is None else np.asarray(v, dtype=object if exact else float)
    if len(u) != graph.vertex_count or len(v) != graph.vertex_count:
        raise DomainError("function length does not match the level",
                          {"expected": graph.vertex_count, "got": [len(u), len(v)]})
    return EnergyValue(
        level=graph.level,
        raw=_quadratic(graph, model.base_conductances(graph, exact), u, v),
        renormalized=_quadratic(graph, model.conductances(graph, exact), u, v),
    )


def check_dynamical_invariance(
    table: GluingTable,
    model: ConductanceModel,
    m: int,
    u: Sequence,
) -> InvarianceResidual:
    """
    |E_m(u o R) - N E_{m-1}(u)| and |Ecal_m(u o R) - rho Ecal_{m-1}(u)| for u on V_{m-1}.
    """
    if m < 1:
        raise DomainError("dynamical invariance needs m >= 1", {"level": m})
    coarse = build_level(table, m - 1)
    fine = build_level(table, m)
    pulled = pullback(table, fine, coarse, u)
    before = energy(coarse, model, u)
    after = energy(fine, model, pulled)
    rho = model.energy_factor
    return InvarianceResidual(
        level=m,
        raw=abs(after.raw - table.N * before.raw),
        renormalized=abs(after.renormalized - rho * before.renormalized),
        raw_factor=table.N,
        factor=rho,
    )


def stiffness(graph: LevelGraph, conductances: np.ndarray) -> sparse.csr_matrix:
    """Weighted graph Laplacian, L[x][y] = -c(x,y), rows summing to zero."""
    n = graph.vertex_count
    c = np.asarray(conductances, dtype=float)
    W = sparse.coo_matrix((c, (graph.heads, graph.tails)), shape=(n, n)).tocsr()
    W = W + W.T
    degree = np.asarray(W.sum(axis=1)).ravel()
    return (sparse.diags(degree) - W).tocsr()


def _exact_entries(graph: LevelGraph, conductances: np.ndarray):
    diagonal = [Fraction(0)] * graph.vertex_count
    offdiagonal = {}
    for edge, c in zip(graph.edges, conductances):
        diagonal[edge.head] += c
        diagonal[edge.tail] += c
        for pair in ((edge.head, edge.tail), (edge.tail, edge.head)):
            offdiagonal[pair] = offdiagonal.get(pair, Fraction(0)) - c
    return diagonal, offdiagonal


def _rational(x: Fraction) -> sympy.Rational:
    return sympy.Rational(x.numerator, x.denominator)


def solve_interior(
    graph: LevelGraph,
    model: ConductanceModel,
    fixed: np.ndarray,
    values: Sequence,
) -> np.ndarray:
    """
    Minimize the renormalized energy with `values` prescribed on `fixed`.

    The free block splits into connected components, each solved by
    Cholesky (floats) or sympy LU (Fractions).

    Raises:
        StructuralError: a free component has no edge to a fixed vertex
    """
    exact = is_exact(values)
    n = graph.vertex_count
    fixed = np.asarray(fixed, dtype=int)
    free_mask = np.ones(n, dtype=bool)
    free_mask[fixed] = False
    free = np.flatnonzero(free_mask)

    result = np.empty(n, dtype=object if exact else float)
    result[fixed] = values
    if free.size == 0:
        return result

    L = stiffness(graph, model.conductances(graph))
    L_ff = L[free][:, free]
    L_fb = L[free][:, fixed]
    n_components, labels = connected_components(L_ff, directed=False)
    coupling = -np.asarray(L_fb.sum(axis=1)).ravel()

    if exact:
        diagonal, offdiagonal = _exact_entries(graph, model.conductances(graph, exact=True))
    else:
        rhs = -(L_fb @ np.asarray(values, dtype=float))

    for k in range(n_components):
        idx = np.flatnonzero(labels == k)
        if coupling[idx].sum() <= 0:
            raise StructuralError(
                "interior component is disconnected from the prescribed vertices",
                {"level": graph.level, "vertices": free[idx].tolist()},
            )
        if exact:
            ids = free[idx]
            block = sympy.Matrix(
                len(ids),
                len(ids),
                lambda i, j: _rational(diagonal[ids[i]] if i == j else offdiagonal.get((ids[i], ids[j]), Fraction(0))),
            )
            rhs_exact = sympy.Matrix([
                sum(
                    (-_rational(offdiagonal.get((x, b), Fraction(0))) * _rational(Fraction(val))
                     for b, val in zip(fixed, values)),
                    sympy.Integer(0),
                )
                for x in ids
            ])
            solution = block.LUsolve(rhs_exact)
            for x, value in zip(ids, solution):
                result[x] = Fraction(int(value.p), int(value.q))
        else:
            block = L_ff[idx][:, idx].toarray()
            try:
                factor = linalg.cho_factor(block)
            except linalg.LinAlgError as e:
                raise StructuralError("interior system is singular",
                                      {"level": graph.level, "vertices": free[idx].tolist()}) from e
            result[free[idx]] = linalg.cho_solve(factor, rhs[idx])
    return result


def harmonic_extension(
    table: GluingTable,
    coarse: LevelGraph,
    fine: LevelGraph,
    model: ConductanceModel,
    u: Sequence,
) -> np.ndarray:
    """The energy-minimizing extension of u from V_m to V_{m+1}."""
    if len(u) != coarse.vertex_count:
        raise DomainError("function length does not match the level",
                          {"expected": coarse.vertex_count, "got": len(u)})
    fixed = embedding_map(table, coarse, fine)
    return solve_interior(fine, model, fixed, list(u))


def average_interpolation(
    table: GluingTable,
    coarse: LevelGraph,
    fine: LevelGraph,
    u: Sequence,
) -> np.ndarray:
    """
    Non-harmonic extension: a new vertex takes the mean of the coarse corners
    sharing a fine cell with it (for the gasket, the two edge endpoints).
    """
    exact = is_exact(u)
    fixed = embedding_map(table, coarse, fine)
    coarse_of = {int(f): k for k, f in enumerate(fixed)}
    result = np.empty(fine.vertex_count, dtype=object if exact else float)
    result[fixed] = list(u)

    neighbours = {v: set() for v in range(fine.vertex_count) if v not in coarse_of}
    parents = {v: set() for v in neighbours}
    for cell in fine.cells:
        corners = [coarse_of[x] for x in cell.vertices if x in coarse_of]
        # corners of the coarse cell this fine cell refines
        enclosing = [coarse.address_index[(cell.word[:-1], a)] for a in range(table.B)]
        for x in cell.vertices:
            if x in neighbours:
                neighbours[x].update(corners)
                parents[x].update(enclosing)

    for x, corners in neighbours.items():
        chosen = sorted(corners or parents[x])
        total = sum((u[k] for k in chosen), Fraction(0) if exact else 0.0)
        result[x] = total / len(chosen)
    return result


def energy_limit_estimate(
    table: GluingTable,
    model: ConductanceModel,
    u: Sequence,
    m_max: int,
    method: str = "harmonic",
) -> List[EnergyValue]:
    """
    Ecal_m of successive extensions of u from V_0, m = 0..m_max.

    With harmonic extension the sequence is constant for a compatible model;
    with average interpolation it is nondecreasing.
    """
    if m_max < 1:
        raise DomainError("m_max must be at least 1", {"m_max": m_max})
    if method not in ("harmonic", "average"):
        raise DomainError("method must be 'harmonic' or 'average'", {"method": method})

    coarse = build_level(table, 0)
    values = list(u)
    sequence = [energy(coarse, model, values)]
    for level in range(1, m_max + 1):
        fine = build_level(table, level)
        if method == "harmonic":
            values = harmonic_extension(table, coarse, fine, model, values)
        else:
            values = average_interpolation(table, coarse, fine, values)
        sequence.append(energy(fine, model, values))
        coarse = fine

    logger.info(
        f"📊 Energy sequence ({method}): "
        + ", ".join(f"{float(e.renormalized):.6g}" for e in sequence)
    )
    return sequence
