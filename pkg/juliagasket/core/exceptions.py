"""
Error hierarchy for every service.
Each error carries a machine-readable code and a detail dict.
"""
from typing import Any, Dict, Optional


class GasketError(Exception):
    """Base error; `detail` holds structured diagnostics."""

    code = "gasket_error"

    def __init__(self, message: str, detail: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def to_dict(self) -> Dict[str, Any]:
        """Render the error the way the CLI prints it."""
        return {"error": self.code, "message": self.message, **self.detail}


class DomainError(GasketError, ValueError):
    """Argument outside the operation's domain."""

    code = "domain_error"


class PoleCollisionError(GasketError):
    """An orbit came within tolerance of the pole at 0."""

    code = "pole_collision"


class ClassificationInconclusiveError(GasketError):
    """A critical orbit neither closed up nor escaped."""

    code = "classification_inconclusive"

    def __init__(self, message: str, partial=None, detail: Optional[Dict[str, Any]] = None):
        super().__init__(message, detail)
        self.partial = partial or []


class SolverError(GasketError):
    """Iterative solver hit its cap."""

    code = "solver_error"


class StructuralError(GasketError):
    """Inconsistent gluing table or singular interior system."""

    code = "structural_error"


class EmbeddingError(GasketError):
    """Branch assignment could not place a preimage."""

    code = "embedding_error"


class ConsistencyError(GasketError):
    """Glued addresses landed on different coordinates."""

    code = "consistency_error"


class InferenceError(GasketError):
    """Tile partition of level-1 numerics failed."""

    code = "inference_error"


class UsageError(GasketError):
    """Invalid command-line invocation."""

    code = "usage_error"
