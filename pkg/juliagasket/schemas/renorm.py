"""
Schemas for solutions of the renormalization problem.
"""
from typing import List, Tuple

from pydantic import BaseModel


class RenormSolution(BaseModel):
    """Weights, conductance shape and the eigenvalue of the compatibility system."""

    r: Tuple[float, float, float]
    s: Tuple[float, float]
    lam: float
    r_tilde: Tuple[float, float, float]
    residuals: Tuple[float, float]
    Sigma: float

    @property
    def energy_factor(self) -> float:
        """rho = sum of 1/r_tilde, the factor in E(u o R) = rho E(u)."""
        return sum(1.0 / r for r in self.r_tilde)


class ScanResult(BaseModel):
    """Exploratory roots found by the weight scan."""

    c: Tuple[float, float, float]
    s: Tuple[float, float]
    solutions: List[RenormSolution]
