"""API request/response schemas."""

from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class HealthResponse(BaseModel):
    """Health check response."""
    status: str = "healthy"
    version: str = "1.0.0"


class DesignRequest(BaseModel):
    """Design target: exactly one of SQNR or distortion."""
    sqnr_db: Optional[float] = Field(None, description="Target SQNR in dB")
    distortion: Optional[float] = Field(None, description="Target distortion")

    @model_validator(mode="after")
    def _exactly_one(self) -> "DesignRequest":
        if (self.sqnr_db is None) == (self.distortion is None):
            raise ValueError("exactly one of sqnr_db or distortion is required")
        return self


class CodebookRequest(BaseModel):
    """Codebook for a design point and block size."""
    sqnr_db: float = Field(..., description="Target SQNR in dB")
    block_size: int = Field(..., ge=1, le=16, description="Symbols per block")


class TableRequest(BaseModel):
    """Analytic table request."""
    sqnr_grid: List[float] = Field(..., min_length=1, description="SQNR values in dB")
    block_sizes: List[int] = Field(default=[2, 3, 4, 5], min_length=1)
    distortion_decimals: Optional[int] = Field(
        None, ge=1, le=15, description="Truncate target distortions to this many decimals"
    )


class CurveRequest(BaseModel):
    """Rate/entropy curve request; an omitted grid uses the default distortion grid."""
    distortion_grid: Optional[List[float]] = Field(None, min_length=1)
    block_sizes: List[int] = Field(default=[2, 3], min_length=1)


class SimulationRequest(BaseModel):
    """Monte Carlo run request."""
    sqnr_db: float = Field(..., description="Target SQNR in dB")
    block_sizes: List[int] = Field(default=[2, 3, 4, 5], min_length=1)
    n_samples: int = Field(default=100_000, ge=1)
    seed: int = Field(default=42, ge=0, lt=2**64)


class ErrorResponse(BaseModel):
    """Error payload."""
    error: str
    detail: str
