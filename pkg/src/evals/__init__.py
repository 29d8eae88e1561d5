"""Evaluation modules: analytic reproduction and Monte Carlo simulation."""

from .reproduction import make_curve, make_table
from .simulation import SimulationReport, run_grid, run_simulation, sample_laplacian

__all__ = [
    "SimulationReport",
    "make_curve",
    "make_table",
    "run_grid",
    "run_simulation",
    "sample_laplacian",
]
