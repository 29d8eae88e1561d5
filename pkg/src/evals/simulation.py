"""Monte Carlo check of the analytic design against real encodings."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, Field

from src.core.config import settings
from src.core.errors import BlockSizeError, EmptyInputError
from src.core.observability import get_observability_service
from src.evals.reproduction import analytic_rates
from src.services.block_code import design_codebook, single_symbol_entropy
from src.services.codec import encode
from src.services.quantizer_core import (
    SIGMA2,
    SQRT2,
    quantize_array,
    reconstruct,
    solve_threshold,
)

logger = logging.getLogger(__name__)

# Uniform variates are (k + 1/2) / 2^53, strictly inside (0, 1).
_UNIFORM_BITS = 53


class AnalyticSummary(BaseModel):
    """Closed-form predictions for a design point."""

    t1: float
    distortion: float
    sqnr_db: float
    p1: float
    p2: float
    entropy_per_symbol: float
    rate_per_symbol: Dict[int, float]


class EmpiricalSummary(BaseModel):
    """Quantities measured on sampled and encoded data."""

    mse: float
    sqnr_db: float
    bits_per_symbol: Dict[int, float]
    p1_frequency: float


class SimulationReport(BaseModel):
    """Analytic and empirical halves of one Monte Carlo run."""

    seed: int = Field(..., ge=0, lt=2**64)
    n_samples: int = Field(..., ge=1)
    sqnr_target_db: float
    analytic: AnalyticSummary
    empirical: EmpiricalSummary


def sample_laplacian(seed: int, n: int) -> npt.NDArray[np.float64]:
    """Draw ``n`` unit-variance Laplacian samples by inverse-CDF transform.

    The generator is numpy's PCG64 seeded with ``seed``.
    """
    if n < 1:
        raise EmptyInputError(f"Sample count must be positive, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    k = rng.integers(0, 2**_UNIFORM_BITS, size=n, dtype=np.int64)
    centered = (k + 0.5) * 2.0**-_UNIFORM_BITS - 0.5
    return -np.sign(centered) * np.log1p(-2.0 * np.abs(centered)) / SQRT2


def derive_seed(master: int, index: int) -> int:
    """Independent seed for grid point ``index`` of a run seeded with ``master``."""
    sequence = np.random.SeedSequence(master, spawn_key=(index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def run_simulation(
    target_sqnr_db: float,
    block_sizes: Iterable[int],
    n: Optional[int] = None,
    seed: Optional[int] = None,
) -> SimulationReport:
    """Design, sample, encode and compare against the closed-form predictions."""
    n = settings.default_samples if n is None else n
    seed = settings.default_seed if seed is None else seed
    block_sizes = sorted(set(block_sizes))
    if not block_sizes:
        raise BlockSizeError("At least one block size is required")
    if n < max(block_sizes):
        raise BlockSizeError(f"Sample count {n} is smaller than block size {max(block_sizes)}")

    observability = get_observability_service()
    with observability.trace_simulation(target_sqnr_db, n):
        design = solve_threshold(target_sqnr_db)
        samples = sample_laplacian(seed, n)
        symbols = quantize_array(samples, design)
        mse = float(np.mean((samples - reconstruct(symbols, design)) ** 2))

        bits_per_symbol: Dict[int, float] = {}
        for m in block_sizes:
            _, codebook = design_codebook(design, m)
            bits_per_symbol[m] = encode(samples, design, codebook).bits_per_symbol()

        report = SimulationReport(
            seed=seed,
            n_samples=n,
            sqnr_target_db=target_sqnr_db,
            analytic=AnalyticSummary(
                t1=design.t1,
                distortion=design.distortion,
                sqnr_db=design.sqnr_db,
                p1=design.p1,
                p2=design.p2,
                entropy_per_symbol=single_symbol_entropy(design.p1, design.p2),
                rate_per_symbol=analytic_rates(design, block_sizes),
            ),
            empirical=EmpiricalSummary(
                mse=mse,
                sqnr_db=10.0 * math.log10(SIGMA2 / mse),
                bits_per_symbol=bits_per_symbol,
                p1_frequency=float(np.count_nonzero(symbols == 1)) / n,
            ),
        )

    logger.info("Simulation finished", extra={"extra_fields": {
        "target_sqnr_db": target_sqnr_db,
        "seed": seed,
        "n_samples": n,
        "empirical_sqnr_db": report.empirical.sqnr_db,
    }})
    return report


def run_grid(
    targets: Sequence[float],
    block_sizes: Iterable[int],
    n: Optional[int] = None,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> List[SimulationReport]:
    """Simulate every target; point ``i`` uses ``derive_seed(seed, i)``.

    Results do not depend on ``workers``.
    """
    seed = settings.default_seed if seed is None else seed
    workers = settings.simulation_workers if workers is None else workers
    block_sizes = sorted(set(block_sizes))

    def run_point(index: int) -> SimulationReport:
        return run_simulation(targets[index], block_sizes, n, derive_seed(seed, index))

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(run_point, range(len(targets))))
