"""LAPQ container: quantize, block and Huffman-encode real samples, and back.

Layout (big-endian)::

    0-3   magic b"LAPQ"
    4     version (1)
    5     block size M
    6-13  t1, IEEE-754 double
    14-21 sample count, unsigned 64-bit
    22    pad bits in the final payload byte
    23-26 length of the JSON codebook
    ...   JSON codebook, then the payload, MSB first
"""

import logging
import math
import struct
from typing import Dict, List

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.core.errors import (
    CodebookMismatchError,
    CorruptHeaderError,
    DanglingBitsError,
    EmptyInputError,
    InvalidSampleError,
    PayloadError,
    TruncatedPayloadError,
)
from src.core.observability import get_observability_service
from src.services.block_code import CodeBook, check_block_size
from src.services.quantizer_core import QuantizerDesign, quantize_array, reconstruct

logger = logging.getLogger(__name__)

MAGIC = b"LAPQ"
VERSION = 1
_HEADER = struct.Struct(">4sBBdQBI")

# Padded tail blocks use the most probable symbol.
PAD_SYMBOL = 1


class BitStream(BaseModel):
    """Encoded samples with everything the decoder needs."""

    model_config = ConfigDict(frozen=True)

    block_size: int = Field(..., ge=1, le=255)
    t1: float = Field(..., ge=0)
    sample_count: int = Field(..., ge=0, lt=2**64)
    pad_bits: int = Field(..., ge=0, le=7)
    codebook: CodeBook
    payload: bytes

    @property
    def code_bits(self) -> int:
        """Number of payload bits that belong to codewords."""
        return len(self.payload) * 8 - self.pad_bits

    @property
    def block_count(self) -> int:
        """Number of codewords, including the padded tail block."""
        return -(-self.sample_count // self.block_size)

    def bits_per_symbol(self) -> float:
        """Empirical rate against the true sample count."""
        return self.code_bits / self.sample_count if self.sample_count else 0.0

    def to_bytes(self) -> bytes:
        """Serialize header, codebook and payload."""
        codebook_json = self.codebook.to_json().encode("utf-8")
        header = _HEADER.pack(
            MAGIC,
            VERSION,
            self.block_size,
            self.t1,
            self.sample_count,
            self.pad_bits,
            len(codebook_json),
        )
        return header + codebook_json + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitStream":
        """Parse a container, rejecting any deviation from the layout."""
        if len(data) < _HEADER.size:
            raise CorruptHeaderError(
                f"corrupt header: {len(data)} bytes is shorter than the {_HEADER.size}-byte header"
            )
        magic, version, block_size, t1, sample_count, pad_bits, json_length = (
            _HEADER.unpack_from(data)
        )
        if magic != MAGIC:
            raise CorruptHeaderError(f"corrupt header: bad magic {magic!r}")
        if version != VERSION:
            raise CorruptHeaderError(f"corrupt header: unsupported version {version}")
        try:
            QuantizerDesign.from_threshold(t1)
        except ValueError as e:
            raise CorruptHeaderError(f"corrupt header: invalid threshold {t1!r}") from e
        if pad_bits > 7:
            raise CorruptHeaderError(f"corrupt header: pad bits {pad_bits} exceed 7")
        try:
            check_block_size(block_size)
        except ValueError as e:
            raise CorruptHeaderError(f"corrupt header: {e}") from e

        end = _HEADER.size + json_length
        if end > len(data):
            raise CorruptHeaderError("corrupt header: codebook extends past end of data")
        try:
            codebook = CodeBook.from_json(data[_HEADER.size:end])
        except ValidationError as e:
            raise CorruptHeaderError(
                f"corrupt header: invalid codebook ({e.error_count()} errors)"
            ) from e
        if codebook.block_size != block_size:
            raise CorruptHeaderError(
                f"corrupt header: codebook is for M={codebook.block_size}, "
                f"header says M={block_size}"
            )

        return cls(
            block_size=block_size,
            t1=t1,
            sample_count=sample_count,
            pad_bits=pad_bits,
            codebook=codebook,
            payload=data[end:],
        )


def _check_codebook(design: QuantizerDesign, codebook: CodeBook) -> None:
    counts = np.array([e.symbols.count(1) for e in codebook.entries])
    probabilities = design.p1 ** counts * design.p2 ** (codebook.block_size - counts)
    expected = math.fsum(probabilities * codebook.lengths)
    if abs(expected - codebook.avg_bits_per_block) > 1e-9:
        raise CodebookMismatchError(
            f"Codebook rate {codebook.avg_bits_per_block:.6f} bits/block does not match "
            f"{expected:.6f} for design t1={design.t1}"
        )


def _code_table(codebook: CodeBook) -> tuple[npt.NDArray[np.uint8], npt.NDArray[np.bool_]]:
    """Left-aligned codeword bits per block rank and the mask of valid bits."""
    lengths = codebook.lengths
    width = int(lengths.max())
    bits = np.zeros((len(lengths), width), dtype=np.uint8)
    for rank, entry in enumerate(codebook.entries):
        code = np.frombuffer(entry.code.encode("ascii"), dtype=np.uint8)
        bits[rank, : entry.length] = code - ord("0")
    mask = np.arange(width) < lengths[:, None]
    return bits, mask


def block_ranks(symbols: npt.NDArray[np.uint8], m: int) -> npt.NDArray[np.int64]:
    """Lexicographic rank of each M-symbol block, padding the tail with symbol 1."""
    tail = (-len(symbols)) % m
    padded = np.concatenate([symbols, np.full(tail, PAD_SYMBOL, dtype=np.uint8)])
    bits = padded.reshape(-1, m).astype(np.int64) - 1
    weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return bits @ weights


def encode(
    samples: npt.ArrayLike, design: QuantizerDesign, codebook: CodeBook
) -> BitStream:
    """Quantize ``samples`` and Huffman-encode them in blocks of ``codebook.block_size``."""
    values = np.asarray(samples, dtype=np.float64).ravel()
    if values.size == 0:
        raise EmptyInputError("Cannot encode an empty sample sequence")
    if not np.all(np.isfinite(values)):
        raise InvalidSampleError("Samples must be finite")
    _check_codebook(design, codebook)

    m = codebook.block_size
    observability = get_observability_service()
    with observability.trace_stage("codec.encode", block_size=m, samples=int(values.size)):
        ranks = block_ranks(quantize_array(values, design), m)
        table, mask = _code_table(codebook)
        stream_bits = table[ranks][mask[ranks]]
        payload = np.packbits(stream_bits, bitorder="big").tobytes()
        pad_bits = (-stream_bits.size) % 8

    observability.record_encode(m, int(ranks.size), int(stream_bits.size))
    logger.info("Stream encoded", extra={"extra_fields": {
        "block_size": m,
        "samples": int(values.size),
        "code_bits": int(stream_bits.size),
        "bits_per_symbol": stream_bits.size / values.size,
    }})
    return BitStream(
        block_size=m,
        t1=design.t1,
        sample_count=int(values.size),
        pad_bits=pad_bits,
        codebook=codebook,
        payload=payload,
    )


def decode_symbols(stream: BitStream) -> npt.NDArray[np.uint8]:
    """Recover the quantizer symbols, tail padding removed."""
    m = stream.block_size
    by_length: Dict[int, Dict[str, int]] = {}
    for rank, entry in enumerate(stream.codebook.entries):
        by_length.setdefault(entry.length, {})[entry.code] = rank
    lengths = sorted(by_length)

    raw = np.unpackbits(np.frombuffer(stream.payload, dtype=np.uint8), bitorder="big")
    text = (raw + ord("0")).tobytes().decode("ascii")
    usable = len(text) - stream.pad_bits
    if usable < 0:
        raise TruncatedPayloadError("Payload is shorter than its pad bits")

    ranks: List[int] = []
    pos = 0
    for _ in range(stream.block_count):
        for length in lengths:
            if pos + length > usable:
                raise TruncatedPayloadError(
                    f"Payload ended after {len(ranks)} of {stream.block_count} blocks"
                )
            rank = by_length[length].get(text[pos:pos + length])
            if rank is not None:
                ranks.append(rank)
                pos += length
                break
        else:
            raise DanglingBitsError(f"No codeword matches the bits at offset {pos}")

    if pos != usable:
        raise DanglingBitsError(f"{usable - pos} code bits left after the last block")
    if "1" in text[usable:]:
        raise DanglingBitsError("Pad bits must be zero")

    rank_array = np.asarray(ranks, dtype=np.int64)
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    symbols = ((rank_array[:, None] >> shifts) & 1).astype(np.uint8).ravel() + 1
    return symbols[: stream.sample_count]


def decode(stream: BitStream) -> npt.NDArray[np.float64]:
    """Reconstruct samples from a stream; levels are recomputed from its t1."""
    observability = get_observability_service()
    with observability.trace_stage("codec.decode", block_size=stream.block_size):
        try:
            design = QuantizerDesign.from_threshold(stream.t1)
            symbols = decode_symbols(stream)
        except PayloadError as e:
            observability.record_decode_error(type(e).__name__)
            raise
    logger.info("Stream decoded", extra={"extra_fields": {
        "block_size": stream.block_size,
        "samples": stream.sample_count,
        "code_bits": stream.code_bits,
    }})
    return reconstruct(symbols, design)
