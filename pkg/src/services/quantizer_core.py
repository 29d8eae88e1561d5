"""Closed-form design of the asymmetric two-level quantizer for a Laplacian source.

The source is the zero-mean, unit-variance Laplacian
``p(x) = exp(-sqrt(2)|x|) / sqrt(2)``. A design is fully determined by its
non-negative decision threshold ``t1``; the two representation levels sit at
the centroids of the cells ``(-inf, t1]`` and ``(t1, inf)``.

Expressions containing ``exp(sqrt(2) t1)`` are evaluated after multiplying
numerator and denominator by ``exp(-sqrt(2) t1)`` so they stay finite for
every threshold.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import bisect

from src.core.config import settings
from src.core.errors import (
    InfeasibleTargetError,
    InvalidThresholdError,
    SolverError,
)
from src.core.observability import get_observability_service

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

# Source variance; all SQNR/distortion conversions assume unit variance.
SIGMA2 = 1.0

# Distortion and SQNR of the symmetric (t1 = 0) Lloyd-Max quantizer.
OPTIMUM_DISTORTION = 0.5
OPTIMUM_SQNR_DB = 10.0 * math.log10(SIGMA2 / OPTIMUM_DISTORTION)

# Targets this close below D = 0.5 are the optimum itself: 3.0103 dB rounds
# 10*log10(2) up and would otherwise be rejected as infeasible.
DISTORTION_SLACK = 1e-6


class QuantizerDesign(BaseModel):
    """One designed quantizer: threshold, levels, distortion and symbol probabilities."""

    model_config = ConfigDict(frozen=True)

    t1: float = Field(..., ge=0, description="Decision threshold")
    y1: float = Field(..., lt=0, description="Level of cell (-inf, t1]")
    y2: float = Field(..., gt=0, description="Level of cell (t1, inf)")
    distortion: float = Field(..., gt=0, le=1, description="Mean squared error")
    sqnr_db: float = Field(..., description="Signal to quantization noise ratio")
    p1: float = Field(..., ge=0, le=1, description="Probability of symbol 1")
    p2: float = Field(..., ge=0, le=1, description="Probability of symbol 2")

    @model_validator(mode="after")
    def _check_consistency(self) -> "QuantizerDesign":
        if abs(self.p1 + self.p2 - 1.0) > 1e-12:
            raise ValueError("p1 + p2 must equal 1")
        if not self.y1 <= self.t1 < self.y2:
            raise ValueError("levels must bracket the threshold")
        return self

    @classmethod
    def from_threshold(cls, t1: float) -> "QuantizerDesign":
        """Populate every derived field from the threshold alone."""
        y1, y2 = representation_levels(t1)
        p1, p2 = symbol_probabilities(t1)
        d = distortion(t1)
        return cls(
            t1=t1,
            y1=y1,
            y2=y2,
            distortion=d,
            sqnr_db=distortion_to_sqnr(d),
            p1=p1,
            p2=p2,
        )


def _check_threshold(t1: float) -> None:
    if not math.isfinite(t1) or t1 < 0:
        raise InvalidThresholdError(
            f"Threshold must be finite and non-negative, got {t1!r}"
        )


def laplacian_pdf(x: float) -> float:
    """Unit-variance Laplacian density."""
    return math.exp(-SQRT2 * abs(x)) / SQRT2


def representation_levels(t1: float) -> Tuple[float, float]:
    """Centroid levels ``(y1, y2)`` of the two cells split at ``t1``."""
    _check_threshold(t1)
    decay = math.exp(-SQRT2 * t1)
    y1 = (SQRT2 + 2.0 * t1) * decay / (2.0 * decay - 4.0)
    y2 = t1 + 1.0 / SQRT2
    return y1, y2


def distortion(t1: float) -> float:
    """Mean squared error of the quantizer with centroid levels."""
    _check_threshold(t1)
    decay = math.exp(-SQRT2 * t1)
    numerator = (3.0 + 2.0 * SQRT2 * t1 + 2.0 * t1 * t1) * decay - 4.0
    return numerator / (2.0 * decay - 4.0)


def symbol_probabilities(t1: float) -> Tuple[float, float]:
    """Probabilities of the lower and upper cell."""
    _check_threshold(t1)
    p2 = 0.5 * math.exp(-SQRT2 * t1)
    return 1.0 - p2, p2


def sqnr_to_distortion(sqnr_db: float) -> float:
    """Distortion of a unit-variance source at the given SQNR."""
    return SIGMA2 / 10.0 ** (sqnr_db / 10.0)


def distortion_to_sqnr(d: float) -> float:
    """SQNR in dB of a unit-variance source at distortion ``d``."""
    if not d > 0:
        raise InfeasibleTargetError(f"Distortion must be positive, got {d!r}")
    return 10.0 * math.log10(SIGMA2 / d)


def design_for_distortion(
    d: float,
    *,
    tolerance: Optional[float] = None,
    bracket_cap: Optional[float] = None,
) -> QuantizerDesign:
    """Find the threshold whose distortion equals ``d``.

    D(t1) rises monotonically from 0.5 at t1 = 0 towards 1, so the root is
    bracketed by doubling an upper bound and then located by bisection.
    """
    tolerance = settings.solver_tolerance if tolerance is None else tolerance
    bracket_cap = settings.bracket_cap if bracket_cap is None else bracket_cap
    observability = get_observability_service()

    with observability.trace_stage("quantizer.design", target_distortion=d):
        if not math.isfinite(d) or d < OPTIMUM_DISTORTION - DISTORTION_SLACK:
            raise InfeasibleTargetError(
                f"Distortion {d!r} is below the two-level optimum "
                f"D >= {OPTIMUM_DISTORTION} (SQNR <= {OPTIMUM_SQNR_DB:.4f} dB)"
            )
        if d <= OPTIMUM_DISTORTION:
            observability.record_design("optimum")
            return QuantizerDesign.from_threshold(0.0)
        if d >= 1.0:
            raise InfeasibleTargetError(
                f"Distortion {d!r} is not attainable: D(t1) < 1 for every threshold"
            )

        t_hi = 1.0
        while distortion(t_hi) <= d:
            if t_hi >= bracket_cap:
                raise InfeasibleTargetError(
                    f"Distortion {d!r} needs a threshold beyond {bracket_cap}"
                )
            t_hi = min(2.0 * t_hi, bracket_cap)

        t1 = bisect(
            lambda t: distortion(t) - d,
            0.0,
            t_hi,
            xtol=1e-15,
            maxiter=200,
        )
        residual = abs(distortion(t1) - d)
        if residual > tolerance:
            raise SolverError(
                f"Threshold search stalled at t1={t1!r} with |D - target| = {residual:.3e}"
            )

        observability.record_design("bisection")
        logger.debug("Threshold solved", extra={"extra_fields": {
            "target_distortion": d,
            "t1": t1,
            "bracket_high": t_hi,
            "residual": residual,
        }})
        return QuantizerDesign.from_threshold(t1)


def solve_threshold(
    target_sqnr_db: float,
    *,
    tolerance: Optional[float] = None,
    bracket_cap: Optional[float] = None,
) -> QuantizerDesign:
    """Design the quantizer that attains ``target_sqnr_db``."""
    if not math.isfinite(target_sqnr_db):
        raise InfeasibleTargetError(f"SQNR must be finite, got {target_sqnr_db!r}")
    try:
        return design_for_distortion(
            sqnr_to_distortion(target_sqnr_db),
            tolerance=tolerance,
            bracket_cap=bracket_cap,
        )
    except InfeasibleTargetError as e:
        raise InfeasibleTargetError(
            f"SQNR {target_sqnr_db} dB is infeasible: the two-level quantizer "
            f"reaches at most {OPTIMUM_SQNR_DB:.4f} dB and must stay above 0 dB"
        ) from e


def quantize(x: float, design: QuantizerDesign) -> int:
    """Cell index of ``x``; the threshold itself belongs to cell 1."""
    return 1 if x <= design.t1 else 2


def quantize_array(
    samples: npt.ArrayLike, design: QuantizerDesign
) -> npt.NDArray[np.uint8]:
    """Vectorized :func:`quantize` returning symbols in {1, 2}."""
    values = np.asarray(samples, dtype=np.float64)
    return np.where(values <= design.t1, 1, 2).astype(np.uint8)


def reconstruct(
    symbols: npt.ArrayLike, design: QuantizerDesign
) -> npt.NDArray[np.float64]:
    """Map symbols in {1, 2} to their representation levels."""
    return np.where(np.asarray(symbols) == 1, design.y1, design.y2).astype(np.float64)
