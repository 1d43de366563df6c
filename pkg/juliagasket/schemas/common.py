"""
Shared field types for schemas.
Complex numbers travel as [re, im] pairs.
"""
from typing import Annotated, Any

from pydantic import BeforeValidator, PlainSerializer


def _to_complex(value: Any) -> complex:
    """Accept complex, real, "re", "re,im" or [re, im]."""
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        parts = [p.strip() for p in value.split(",")]
        if len(parts) == 1:
            return complex(parts[0].replace("i", "j"))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
        raise ValueError(f"cannot read complex number from {value!r}")
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot read complex number from {value!r}")


ComplexNumber = Annotated[
    complex,
    BeforeValidator(_to_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list),
]
