"""
Schema for spectral reports.
"""
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class SpectralReport(BaseModel):
    """Eigenvalues of one level plus optional spectral-mapping diagnostics."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    level: int
    kind: Literal["dirichlet", "neumann"]
    eigenvalues: List[float]
    eigenvectors: Optional[np.ndarray] = Field(default=None, exclude=True)
    eigen_residuals: List[float] = []
    map_residuals: List[float] = []
    spectrum_distances: List[float] = []
    energy_defects: List[float] = []
    extrapolated_distances: List[float] = []
