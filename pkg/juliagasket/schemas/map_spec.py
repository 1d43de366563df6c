"""
Schema for the rational map R(z) = z^n + lambda / z^m.
"""
import cmath
import math

from pydantic import BaseModel, ConfigDict, Field, field_validator

from juliagasket.schemas.common import ComplexNumber


class MapSpec(BaseModel):
    """Exponents and parameter of the map; N and omega_N are derived."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n: int = Field(..., ge=2, description="Exponent of the polynomial part")
    m: int = Field(..., ge=1, description="Exponent of the pole at 0")
    lam: ComplexNumber = Field(..., alias="lambda")

    @field_validator("lam")
    @classmethod
    def nonzero_lambda(cls, value: complex) -> complex:
        if value == 0:
            raise ValueError("lambda must be nonzero")
        return value

    @property
    def N(self) -> int:
        """Degree of the map."""
        return self.n + self.m

    @property
    def omega_N(self) -> complex:
        """Primitive N-th root of unity."""
        return cmath.exp(2j * math.pi / self.N)

    @classmethod
    def sierpinski(cls) -> "MapSpec":
        """z^2 - 16/(27 z), whose Julia set is a Sierpinski gasket."""
        return cls(n=2, m=1, lam=complex(-16 / 27, 0.0))

    def with_lambda(self, lam: complex) -> "MapSpec":
        """Same exponents, new parameter."""
        return MapSpec(n=self.n, m=self.m, lam=lam)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True)
