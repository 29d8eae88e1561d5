"""API route handlers."""

import logging
from typing import List

from fastapi import APIRouter, HTTPException

from src.api.schemas import (
    CodebookRequest,
    CurveRequest,
    DesignRequest,
    HealthResponse,
    SimulationRequest,
    TableRequest,
)
from src.core.config import settings
from src.evals.reproduction import (
    CurvePoint,
    TableRow,
    default_distortion_grid,
    make_curve,
    make_table,
)
from src.evals.simulation import SimulationReport, run_simulation
from src.services.block_code import CodeBook, check_block_size, design_codebook
from src.services.quantizer_core import (
    QuantizerDesign,
    design_for_distortion,
    solve_threshold,
)

logger = logging.getLogger(__name__)

# Create router
router = APIRouter()


@router.get("/health", response_model=HealthResponse)
async def health_check() -> HealthResponse:
    """Health check endpoint."""
    return HealthResponse(version=settings.api_version)


@router.post("/v1/design", response_model=QuantizerDesign)
def design(request: DesignRequest) -> QuantizerDesign:
    """Design the quantizer for an SQNR or distortion target."""
    if request.sqnr_db is not None:
        return solve_threshold(request.sqnr_db)
    return design_for_distortion(request.distortion)  # type: ignore[arg-type]


@router.post("/v1/codebook", response_model=CodeBook, response_model_by_alias=True)
def codebook(request: CodebookRequest) -> CodeBook:
    """Extended Huffman codebook for a design point."""
    check_block_size(request.block_size)
    _, book = design_codebook(solve_threshold(request.sqnr_db), request.block_size)
    return book


@router.post("/v1/table", response_model=List[TableRow])
def table(request: TableRequest) -> List[TableRow]:
    """Analytic performance table."""
    for m in request.block_sizes:
        check_block_size(m)
    return make_table(
        request.sqnr_grid, request.block_sizes, distortion_decimals=request.distortion_decimals
    )


@router.post("/v1/curve", response_model=List[CurvePoint])
def curve(request: CurveRequest) -> List[CurvePoint]:
    """Entropy and rates against distortion."""
    for m in request.block_sizes:
        check_block_size(m)
    grid = request.distortion_grid or default_distortion_grid()
    return make_curve(grid, request.block_sizes)


@router.post("/v1/simulate", response_model=SimulationReport)
def simulate(request: SimulationRequest) -> SimulationReport:
    """Monte Carlo verification of one design point."""
    if request.n_samples > settings.api_max_samples:
        raise HTTPException(
            status_code=422,
            detail=f"n_samples must not exceed {settings.api_max_samples}",
        )
    for m in request.block_sizes:
        check_block_size(m)
    logger.info("Simulation requested", extra={"extra_fields": {
        "sqnr_db": request.sqnr_db,
        "n_samples": request.n_samples,
    }})
    return run_simulation(
        request.sqnr_db, request.block_sizes, request.n_samples, request.seed
    )
