"""Application configuration management."""

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(
        env_prefix="LAPQ_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Configuration
    environment: str = Field(default="development")
    log_level: str = Field(default="INFO")

    # Quantizer design
    solver_tolerance: float = Field(default=1e-10, gt=0)
    bracket_cap: float = Field(default=50.0, gt=1)
    optimum_snap_db: float = Field(default=0.011, ge=0)
    sqnr_band_low: float = Field(default=2.0)
    sqnr_band_high: float = Field(default=3.0)

    # Block coding
    max_block_size: int = Field(default=16, ge=1, le=16)

    # Simulation
    default_seed: int = Field(default=42, ge=0, lt=2**64)
    default_samples: int = Field(default=1_000_000, ge=1)
    curve_points: int = Field(default=101, ge=2)
    curve_distortion_high: float = Field(default=0.631, gt=0.5, lt=1.0)
    simulation_workers: int = Field(default=4, ge=1)

    # Observability Configuration
    otlp_endpoint: Optional[str] = Field(default=None)

    # API Configuration
    api_max_samples: int = Field(default=2_000_000, ge=1)
    api_title: str = "Laplacian Two-Level Quantizer API"
    api_version: str = "1.0.0"
    api_description: str = (
        "Asymmetric two-level quantizer design with extended Huffman coding"
    )


# Global settings instance
settings = Settings()
