"""Command-line front end: design, table, curve, encode, decode, simulate."""

import argparse
import json
import logging
import math
import sys
from contextlib import nullcontext
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TextIO

import numpy as np

from src.core.config import settings
from src.core.errors import FormatError, LapqError, UsageError
from src.core.logging import setup_logging
from src.core.observability import setup_observability
from src.evals.reproduction import (
    default_distortion_grid,
    make_curve,
    make_table,
    write_curve_csv,
    write_table_csv,
)
from src.evals.simulation import run_grid, run_simulation
from src.services.block_code import check_block_size, design_codebook
from src.services.codec import BitStream, decode, encode
from src.services.quantizer_core import (
    design_for_distortion,
    quantize_array,
    reconstruct,
    solve_threshold,
)

logger = logging.getLogger(__name__)

RAW_DTYPE = np.dtype("<f8")

# Relative slack, in steps, for grid points that land on stop up to rounding.
GRID_EPSILON = 1e-9


class CliParser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as :class:`UsageError`."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def parse_grid(text: str) -> List[float]:
    """Parse ``start:step:stop``.

    Points never pass ``stop``; ``stop`` itself is included when a whole number
    of steps lands on it.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:step:stop, got {text!r}")
    try:
        start, step, stop = (float(p) for p in parts)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"grid values must be numbers, got {text!r}") from e
    if not all(math.isfinite(v) for v in (start, step, stop)):
        raise argparse.ArgumentTypeError(f"grid values must be finite, got {text!r}")
    if stop < start:
        raise argparse.ArgumentTypeError(f"grid stop {stop} is below start {start}")
    if stop == start:
        return [start]
    if step <= 0:
        raise argparse.ArgumentTypeError(f"grid step must be positive, got {step}")
    count = math.floor((stop - start) / step + GRID_EPSILON)
    grid = [round(start + i * step, 12) for i in range(count + 1)]
    if abs(grid[-1] - stop) <= GRID_EPSILON * step:
        grid[-1] = stop
    return [min(point, stop) for point in grid]


def parse_blocks(text: str) -> List[int]:
    """Parse a comma-separated list of block sizes."""
    try:
        blocks = sorted({int(p) for p in text.split(",") if p.strip()})
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"block sizes must be integers, got {text!r}") from e
    if not blocks:
        raise argparse.ArgumentTypeError("at least one block size is required")
    return blocks


def parse_seed(text: str) -> int:
    """Parse an unsigned 64-bit seed."""
    try:
        seed = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from e
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def parse_count(text: str) -> int:
    """Parse a positive sample count."""
    try:
        count = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"count must be an integer, got {text!r}") from e
    if count < 1:
        raise argparse.ArgumentTypeError(f"count must be positive, got {count}")
    return count


def _output(path: str) -> Any:
    if path == "-":
        return nullcontext(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="")


def _print_summary(summary: Dict[str, Any], fmt: str, out: TextIO) -> None:
    if fmt == "json":
        out.write(json.dumps(summary, indent=2) + "\n")
        return
    width = max(len(key) for key in summary)
    for key, value in summary.items():
        rendered = f"{value:.6f}" if isinstance(value, float) else str(value)
        out.write(f"{key:<{width}}  {rendered}\n")


def _check_blocks(blocks: Sequence[int]) -> None:
    for m in blocks:
        check_block_size(m)


def _read_raw_samples(path: str) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) % RAW_DTYPE.itemsize:
        raise FormatError(
            f"{path}: raw sample file length {len(data)} is not a multiple of 8 bytes"
        )
    return np.frombuffer(data, dtype=RAW_DTYPE)


def cmd_design(args: argparse.Namespace) -> int:
    """Print the design for an SQNR or distortion target."""
    if args.sqnr is not None:
        design = solve_threshold(args.sqnr)
    else:
        design = design_for_distortion(args.distortion)
    _print_summary(design.model_dump(), args.format, sys.stdout)
    return 0


def cmd_table(args: argparse.Namespace) -> int:
    """Write the analytic performance table as CSV."""
    _check_blocks(args.blocks)
    rows = make_table(args.grid, args.blocks, distortion_decimals=args.distortion_decimals)
    with _output(args.out) as out:
        write_table_csv(rows, args.blocks, out)
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    """Write entropy and rate against distortion as CSV."""
    _check_blocks(args.blocks)
    grid = args.dgrid if args.dgrid is not None else default_distortion_grid()
    points = make_curve(grid, args.blocks)
    with _output(args.out) as out:
        write_curve_csv(points, args.blocks, out)
    return 0


def cmd_encode(args: argparse.Namespace) -> int:
    """Encode a raw float64 file into a LAPQ container."""
    check_block_size(args.block)
    samples = _read_raw_samples(args.input)
    design = solve_threshold(args.sqnr)
    _, codebook = design_codebook(design, args.block)
    stream = encode(samples, design, codebook)
    Path(args.out).write_bytes(stream.to_bytes())

    mse = float(np.mean((samples - reconstruct(quantize_array(samples, design), design)) ** 2))
    _print_summary({
        "samples": stream.sample_count,
        "block_size": stream.block_size,
        "t1": design.t1,
        "bits_per_symbol": stream.bits_per_symbol(),
        "analytic_bits_per_symbol": codebook.avg_bits_per_symbol,
        "mse": mse,
        "analytic_mse": design.distortion,
    }, args.format, sys.stdout)
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    """Decode a LAPQ container into a raw float64 file."""
    stream = BitStream.from_bytes(Path(args.input).read_bytes())
    values = decode(stream)
    Path(args.out).write_bytes(values.astype(RAW_DTYPE).tobytes())
    _print_summary({
        "samples": int(values.size),
        "block_size": stream.block_size,
        "t1": stream.t1,
        "bits_per_symbol": stream.bits_per_symbol(),
    }, args.format, sys.stdout)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run Monte Carlo verification and write the report as JSON."""
    _check_blocks(args.blocks)
    if args.grid is not None:
        reports = run_grid(args.grid, args.blocks, args.n, args.seed, args.workers)
        document = "[" + ",".join(r.model_dump_json() for r in reports) + "]"
    else:
        document = run_simulation(args.sqnr, args.blocks, args.n, args.seed).model_dump_json()
    with _output(args.out) as out:
        out.write(document + "\n")
    return 0


def build_parser() -> CliParser:
    """Create the argument parser with all subcommands."""
    parser = CliParser(prog="lapq", description="Asymmetric two-level quantizer toolkit")
    parser.add_argument("--verbose", action="store_true", help="Log progress to stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    band = f"{settings.sqnr_band_low}:0.1:{settings.sqnr_band_high}"

    design = subparsers.add_parser("design", help="Design a quantizer")
    target = design.add_mutually_exclusive_group(required=True)
    target.add_argument("--sqnr", type=float, help="Target SQNR in dB")
    target.add_argument("--distortion", type=float, help="Target distortion")
    design.add_argument("--format", choices=["text", "json"], default="text")
    design.set_defaults(handler=cmd_design)

    table = subparsers.add_parser("table", help="Analytic performance table (CSV)")
    table.add_argument("--grid", type=parse_grid, default=parse_grid(band),
                       help="SQNR grid start:step:stop in dB")
    table.add_argument("--blocks", type=parse_blocks, default=[2, 3, 4, 5])
    table.add_argument("--distortion-decimals", type=parse_count, default=None, metavar="N",
                       help="Truncate each target distortion to N decimals before designing")
    table.add_argument("--out", default="-", help="Output CSV path, '-' for stdout")
    table.set_defaults(handler=cmd_table)

    curve = subparsers.add_parser("curve", help="Rate and entropy against distortion (CSV)")
    curve.add_argument("--dgrid", type=parse_grid, default=None,
                       help="Distortion grid start:step:stop")
    curve.add_argument("--blocks", type=parse_blocks, default=[2, 3])
    curve.add_argument("--out", default="-", help="Output CSV path, '-' for stdout")
    curve.set_defaults(handler=cmd_curve)

    enc = subparsers.add_parser("encode", help="Encode raw little-endian float64 samples")
    enc.add_argument("--in", dest="input", required=True)
    enc.add_argument("--sqnr", type=float, required=True)
    enc.add_argument("--block", type=int, required=True)
    enc.add_argument("--out", required=True)
    enc.add_argument("--format", choices=["text", "json"], default="text")
    enc.set_defaults(handler=cmd_encode)

    dec = subparsers.add_parser("decode", help="Decode a LAPQ container")
    dec.add_argument("--in", dest="input", required=True)
    dec.add_argument("--out", required=True)
    dec.add_argument("--format", choices=["text", "json"], default="text")
    dec.set_defaults(handler=cmd_decode)

    sim = subparsers.add_parser("simulate", help="Monte Carlo verification (JSON)")
    sim_target = sim.add_mutually_exclusive_group(required=True)
    sim_target.add_argument("--sqnr", type=float, help="Target SQNR in dB")
    sim_target.add_argument("--grid", type=parse_grid, help="SQNR grid start:step:stop")
    sim.add_argument("--blocks", type=parse_blocks, default=[2, 3, 4, 5])
    sim.add_argument("--n", type=parse_count, default=settings.default_samples)
    sim.add_argument("--seed", type=parse_seed, default=settings.default_seed)
    sim.add_argument("--workers", type=parse_count, default=settings.simulation_workers)
    sim.add_argument("--out", default="-", help="Output JSON path, '-' for stdout")
    sim.set_defaults(handler=cmd_simulate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit status."""
    command: Optional[str] = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        setup_logging(sys.stderr, "INFO" if args.verbose else "WARNING")
        if settings.otlp_endpoint:
            setup_observability()
        handler: Callable[[argparse.Namespace], int] = args.handler
        status = handler(args)
        logger.info("Command finished", extra={
            "command": command,
            "extra_fields": {"status": status},
        })
        return status
    except LapqError as e:
        status = e.exit_code
        message = str(e)
    except OSError as e:
        status = 3
        message = str(e)
    except ValueError as e:
        status = 2
        message = str(e)

    if command is not None:
        logger.info("Command failed", extra={
            "command": command,
            "extra_fields": {"status": status},
        })
    print(f"error: {' '.join(message.split())}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
