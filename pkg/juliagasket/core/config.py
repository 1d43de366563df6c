"""
Library configuration using Pydantic Settings.
Loads overrides from GASKET_* environment variables or a .env file.
"""
from fractions import Fraction
from typing import Tuple

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Numeric defaults shared by every service."""

    LOG_LEVEL: str = "WARNING"

    # Orbit analysis
    ORBIT_TOL: float = 1e-9
    ORBIT_MAX_ITER: int = 200
    POSTCRITICAL_TOL: float = 1e-8
    INDIFFERENT_TOL: float = 1e-6
    NEWTON_MAX_ITER: int = 50

    # Preimage solver
    PREIMAGE_TOL: float = 1e-12
    ABERTH_MAX_SWEEPS: int = 200
    ABERTH_ANGLE_OFFSET: float = 0.37  # radians

    # Geometry
    EMBED_TOL: float = 1e-8
    GLUE_TOL: float = 1e-6
    SECTOR_TIE_TOL: float = 1e-12

    # Graph levels
    LEVEL_CAP: int = 7

    # Renormalization scan
    SCAN_POINTS: int = 10000
    SCAN_R_MIN: float = 1e-3
    SCAN_R_MAX: float = 1e3
    BISECTION_TOL: float = 1e-12

    # Rendering
    RENDER_WIDTH: int = 512
    RENDER_HEIGHT: int = 512
    RENDER_MAX_ITER: int = 30
    RENDER_WINDOW: str = "-85/64,4/3,-85/64,4/3"  # re_min,re_max,im_min,im_max; fractions allowed

    # Randomized property checks
    DEFAULT_SEED: int = 0

    model_config = SettingsConfigDict(
        env_prefix="GASKET_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )

    @property
    def render_window(self) -> Tuple[float, float, float, float]:
        """Parse the comma-separated render window."""
        parts = [float(Fraction(p.strip())) for p in self.RENDER_WINDOW.split(",")]
        if len(parts) != 4:
            raise ValueError(f"RENDER_WINDOW needs 4 numbers, got {self.RENDER_WINDOW!r}")
        return parts[0], parts[1], parts[2], parts[3]


# Global settings instance
settings = Settings()
