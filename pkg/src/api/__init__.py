"""API modules."""

from .routes import router
from .schemas import (
    CodebookRequest,
    CurveRequest,
    DesignRequest,
    HealthResponse,
    SimulationRequest,
    TableRequest,
)

__all__ = [
    "router",
    "CodebookRequest",
    "CurveRequest",
    "DesignRequest",
    "HealthResponse",
    "SimulationRequest",
    "TableRequest",
]
