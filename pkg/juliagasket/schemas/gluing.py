"""
Schema for the combinatorial gluing table of a gasket.
"""
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field

Slot = Tuple[int, int]  # (tile, boundary index)


class GluingTable(BaseModel):
    """
    N tile copies of the boundary set V_0 and how they are identified.

    glue_pairs: slots of sibling tiles that are the same point
    boundary_lift: for each boundary index v, the slot (t_v, a_v) with
        F_{t_v}(q_{a_v}) = q_v
    boundary_dynamics: R(q_v) = q_{boundary_dynamics[v]}
    level0_edges: edges of the level-0 graph, as sorted index pairs
    """

    model_config = ConfigDict(frozen=True)

    N: int = Field(..., ge=2)
    B: int = Field(..., ge=2)
    glue_pairs: List[Tuple[Slot, Slot]]
    boundary_lift: List[Slot]
    boundary_dynamics: List[int]
    level0_edges: List[Tuple[int, int]]
