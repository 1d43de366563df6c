"""
Schemas for orbit analysis and map classification.
"""
from typing import List, Optional

from pydantic import BaseModel

from juliagasket.schemas.common import ComplexNumber


class OrbitAnalysis(BaseModel):
    """Forward orbit of one point: preperiod, cycle and its multiplier."""

    start: ComplexNumber
    preperiod: Optional[int] = None
    period: Optional[int] = None
    cycle: List[ComplexNumber] = []
    multiplier: Optional[ComplexNumber] = None
    converged: bool
    escaped: bool = False
    iterations: int = 0


class ClassificationReport(BaseModel):
    """Critical orbits and the Misiurewicz expansion test."""

    critical_points: List[ComplexNumber]
    critical_values: List[ComplexNumber]
    critical_orbits: List[OrbitAnalysis]
    post_critical_set: List[ComplexNumber]
    periods: List[int]
    s: int
    s_per_critical: int
    mu_min: Optional[float] = None
    is_misiurewicz: bool
    is_ms_candidate: bool
    indeterminate: bool = False
