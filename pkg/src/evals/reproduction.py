"""Analytic performance tables and rate/distortion curves."""

import csv
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np
from pydantic import BaseModel, Field

from src.core.config import settings
from src.core.errors import UsageError
from src.services.block_code import design_codebook, single_symbol_entropy
from src.services.quantizer_core import (
    OPTIMUM_DISTORTION,
    OPTIMUM_SQNR_DB,
    QuantizerDesign,
    design_for_distortion,
    solve_threshold,
    sqnr_to_distortion,
)

logger = logging.getLogger(__name__)

CSV_DECIMALS = 6


class TableRow(BaseModel):
    """Analytic performance of one design point."""

    sqnr_db: float
    distortion: float
    t1: float
    p1: float
    p2: float
    entropy: float = Field(..., description="Bits per symbol")
    rates: Dict[int, float] = Field(..., description="Bits per symbol per block size")


class CurvePoint(BaseModel):
    """Entropy and average rates at one distortion value."""

    distortion: float
    entropy: float
    rates: Dict[int, float]


class RateTradeoff(BaseModel):
    """SQNR given up against the optimum and rate saved against one bit per symbol."""

    sqnr_db: float
    block_size: int
    sqnr_loss_db: float
    rate_per_symbol: float
    rate_reduction: float


def analytic_rates(design: QuantizerDesign, block_sizes: Iterable[int]) -> Dict[int, float]:
    """Huffman bits per symbol for each block size."""
    return {
        m: design_codebook(design, m)[1].avg_bits_per_symbol
        for m in sorted(set(block_sizes))
    }


def design_for_table(
    sqnr_db: float,
    snap_db: Optional[float] = None,
    distortion_decimals: Optional[int] = None,
) -> QuantizerDesign:
    """Design for a table row; targets just below the optimum report the t1 = 0 row.

    With ``distortion_decimals`` the target distortion is truncated to that
    many decimals before the threshold is solved, so rows match tables whose
    thresholds were computed from the printed distortion column.
    """
    snap_db = settings.optimum_snap_db if snap_db is None else snap_db
    if OPTIMUM_SQNR_DB - snap_db <= sqnr_db <= OPTIMUM_SQNR_DB:
        return QuantizerDesign.from_threshold(0.0)
    if distortion_decimals is None or not math.isfinite(sqnr_db):
        return solve_threshold(sqnr_db)
    if distortion_decimals < 1:
        raise UsageError(f"distortion decimals must be positive, got {distortion_decimals}")
    scale = 10 ** distortion_decimals
    return design_for_distortion(math.floor(sqnr_to_distortion(sqnr_db) * scale) / scale)


def make_table(
    sqnr_grid: Sequence[float],
    block_sizes: Iterable[int],
    snap_db: Optional[float] = None,
    distortion_decimals: Optional[int] = None,
) -> List[TableRow]:
    """Performance table over an SQNR grid; no sampling involved."""
    block_sizes = sorted(set(block_sizes))
    rows = []
    for sqnr_db in sqnr_grid:
        design = design_for_table(sqnr_db, snap_db, distortion_decimals)
        rows.append(TableRow(
            sqnr_db=sqnr_db,
            distortion=design.distortion,
            t1=design.t1,
            p1=design.p1,
            p2=design.p2,
            entropy=single_symbol_entropy(design.p1, design.p2),
            rates=analytic_rates(design, block_sizes),
        ))
    logger.info("Table computed", extra={"extra_fields": {
        "rows": len(rows),
        "block_sizes": block_sizes,
        "distortion_decimals": distortion_decimals,
    }})
    return rows


def default_distortion_grid() -> List[float]:
    """Evenly spaced distortions spanning the 2-3 dB operating band."""
    grid = np.linspace(OPTIMUM_DISTORTION, settings.curve_distortion_high, settings.curve_points)
    return [float(d) for d in grid]


def make_curve(distortion_grid: Sequence[float], block_sizes: Iterable[int]) -> List[CurvePoint]:
    """Entropy and per-symbol rates as functions of distortion."""
    block_sizes = sorted(set(block_sizes))
    points = []
    for d in distortion_grid:
        design = design_for_distortion(d)
        points.append(CurvePoint(
            distortion=d,
            entropy=single_symbol_entropy(design.p1, design.p2),
            rates=analytic_rates(design, block_sizes),
        ))
    return points


def rate_reduction(sqnr_db: float, block_size: int) -> RateTradeoff:
    """Trade-off of one design point against the symmetric one-bit quantizer."""
    design = solve_threshold(sqnr_db)
    rate = analytic_rates(design, [block_size])[block_size]
    return RateTradeoff(
        sqnr_db=sqnr_db,
        block_size=block_size,
        sqnr_loss_db=OPTIMUM_SQNR_DB - design.sqnr_db,
        rate_per_symbol=rate,
        rate_reduction=1.0 - rate,
    )


def _fmt(value: float) -> str:
    return f"{value:.{CSV_DECIMALS}f}"


def write_table_csv(rows: Sequence[TableRow], block_sizes: Iterable[int], out: TextIO) -> None:
    """Write table rows as CSV with one rate column per block size."""
    block_sizes = sorted(set(block_sizes))
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["SQNR", "D", "t1", "p1", "p2", "H"] + [f"R(M={m})" for m in block_sizes])
    for row in rows:
        writer.writerow(
            [_fmt(v) for v in (row.sqnr_db, row.distortion, row.t1, row.p1, row.p2, row.entropy)]
            + [_fmt(row.rates[m]) for m in block_sizes]
        )


def write_curve_csv(points: Sequence[CurvePoint], block_sizes: Iterable[int], out: TextIO) -> None:
    """Write curve points as CSV."""
    block_sizes = sorted(set(block_sizes))
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["D", "H"] + [f"R(M={m})" for m in block_sizes])
    for point in points:
        writer.writerow(
            [_fmt(point.distortion), _fmt(point.entropy)]
            + [_fmt(point.rates[m]) for m in block_sizes]
        )
