"""
Schema for a parsed command-line invocation.
"""
from pathlib import Path
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from juliagasket.schemas.common import ComplexNumber

Subcommand = Literal[
    "classify",
    "render",
    "graph",
    "vertices",
    "energy-check",
    "harmonic",
    "renorm",
    "spectrum",
    "invariance",
]


class Invocation(BaseModel):
    """Validated command-line arguments."""

    subcommand: Subcommand
    n: int = Field(2, ge=2)
    m: int = Field(1, ge=1)
    lam: ComplexNumber = complex(-16 / 27, 0.0)
    level: int = Field(1, ge=0)
    tol: Optional[float] = Field(None, gt=0)
    max_iter: Optional[int] = Field(None, ge=1)
    r: Optional[float] = Field(None, gt=0)
    c: Optional[Tuple[float, float, float]] = None
    seed: int = 0
    out: Optional[Path] = None
    trials: int = Field(100, ge=1)
    kind: Literal["dirichlet", "neumann"] = "dirichlet"
    k: Optional[int] = Field(None, ge=1)
    width: Optional[int] = Field(None, ge=1)
    height: Optional[int] = Field(None, ge=1)
    window: Optional[Tuple[float, float, float, float]] = None
    table: Literal["sg", "infer"] = "sg"
    values: Optional[Tuple[float, ...]] = None
    exact: bool = False
    spectral_map: bool = False
    refine: Optional[Tuple[int, int]] = None
    function: Optional[Path] = None

    @model_validator(mode="after")
    def window_ordered(self):
        if self.window is not None:
            re_min, re_max, im_min, im_max = self.window
            if re_min >= re_max or im_min >= im_max:
                raise ValueError(f"--window must be ordered re_min,re_max,im_min,im_max, got {self.window}")
        return self
