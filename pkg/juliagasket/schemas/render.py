"""
Schema for escape-time rendering.
"""
from typing import Tuple

from pydantic import BaseModel, Field, model_validator


class RenderConfig(BaseModel):
    """Pixel grid over a rectangle of the plane."""

    window: Tuple[float, float, float, float] = (-85 / 64, 4 / 3, -85 / 64, 4 / 3)
    width: int = Field(512, ge=1)
    height: int = Field(512, ge=1)
    max_iter: int = Field(30, ge=1)
    escape_radius: float = Field(2.0, ge=2.0)

    @model_validator(mode="after")
    def window_ordered(self):
        re_min, re_max, im_min, im_max = self.window
        if re_min >= re_max or im_min >= im_max:
            raise ValueError(f"window must be ordered, got {self.window}")
        return self
