"""
Schema for a solved preimage set R^{-1}(w).
"""
from typing import List

from pydantic import BaseModel, Field

from juliagasket.schemas.common import ComplexNumber


class PreimageRoot(BaseModel):
    """One root of z^N - w z^m + lambda with its multiplicity."""

    root: ComplexNumber
    multiplicity: int = Field(..., ge=1)


class PreimageSet(BaseModel):
    """All preimages of a target, sorted by (argument, modulus)."""

    target: ComplexNumber
    roots: List[PreimageRoot]
    residuals: List[float]

    @property
    def points(self) -> List[complex]:
        return [r.root for r in self.roots]

    @property
    def total_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.roots)
