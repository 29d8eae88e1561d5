"""Extended Huffman coding of quantizer symbols grouped into M-symbol blocks."""

import heapq
import itertools
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.stats import entropy

from src.core.config import settings
from src.core.errors import (
    BlockSizeError,
    DegenerateModelError,
    InvalidProbabilityError,
    MismatchedModelError,
)
from src.services.quantizer_core import QuantizerDesign

logger = logging.getLogger(__name__)

SymbolTuple = Tuple[int, ...]


class BlockEntry(BaseModel):
    """Probability of one block of quantizer symbols."""

    model_config = ConfigDict(frozen=True)

    symbols: SymbolTuple
    probability: float = Field(..., ge=0, le=1)


class BlockModel(BaseModel):
    """All 2^M blocks of a two-symbol source, in lexicographic tuple order."""

    model_config = ConfigDict(frozen=True)

    block_size: int = Field(..., ge=1)
    p1: float
    p2: float
    blocks: List[BlockEntry]

    @field_validator("block_size")
    @classmethod
    def _check_block_size(cls, m: int) -> int:
        check_block_size(m)
        return m

    @model_validator(mode="after")
    def _check_blocks(self) -> "BlockModel":
        if len(self.blocks) != 2 ** self.block_size:
            raise ValueError("block model must list 2^M blocks")
        if abs(math.fsum(b.probability for b in self.blocks) - 1.0) > 1e-9 * self.block_size:
            raise ValueError("block probabilities must sum to 1")
        return self

    @property
    def probabilities(self) -> npt.NDArray[np.float64]:
        """Block probabilities indexed by lexicographic rank."""
        return np.array([b.probability for b in self.blocks], dtype=np.float64)


class CodeEntry(BaseModel):
    """Codeword of one block."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    symbols: SymbolTuple = Field(..., alias="tuple")
    code: str = Field(..., pattern=r"^[01]+$")
    length: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_length(self) -> "CodeEntry":
        if len(self.code) != self.length:
            raise ValueError(f"codeword {self.code!r} does not have length {self.length}")
        return self


class CodeBook(BaseModel):
    """Prefix-free code for every block of a :class:`BlockModel`."""

    model_config = ConfigDict(frozen=True)

    block_size: int = Field(..., ge=1)
    entries: List[CodeEntry]
    avg_bits_per_block: float = Field(..., ge=0)
    avg_bits_per_symbol: float = Field(..., ge=0)

    @field_validator("block_size")
    @classmethod
    def _check_block_size(cls, m: int) -> int:
        check_block_size(m)
        return m

    @model_validator(mode="after")
    def _check_code(self) -> "CodeBook":
        if len(self.entries) != 2 ** self.block_size:
            raise ValueError("codebook must cover 2^M blocks")
        if [e.symbols for e in self.entries] != block_tuples(self.block_size):
            raise ValueError("codebook entries must follow lexicographic tuple order")
        codes = sorted(e.code for e in self.entries)
        for shorter, longer in zip(codes, codes[1:]):
            if longer.startswith(shorter):
                raise ValueError(f"codeword {shorter!r} is a prefix of {longer!r}")
        longest = max(e.length for e in self.entries)
        if sum(1 << (longest - e.length) for e in self.entries) != 1 << longest:
            raise ValueError("code lengths must satisfy the Kraft equality")
        return self

    @property
    def lengths(self) -> npt.NDArray[np.int64]:
        """Code lengths indexed by lexicographic block rank."""
        return np.array([e.length for e in self.entries], dtype=np.int64)

    def to_json(self) -> str:
        """Compact JSON with the ``tuple`` key for block symbols."""
        return self.model_dump_json(by_alias=True)

    @classmethod
    def from_json(cls, data: str | bytes) -> "CodeBook":
        """Parse the output of :meth:`to_json`."""
        return cls.model_validate_json(data)


def check_block_size(m: int) -> None:
    """Reject block sizes outside ``[1, settings.max_block_size]``."""
    if not 1 <= m <= settings.max_block_size:
        raise BlockSizeError(
            f"Block size must be in [1, {settings.max_block_size}], got {m}"
        )


def block_tuples(m: int) -> List[SymbolTuple]:
    """All M-tuples over {1, 2} in lexicographic order."""
    return list(itertools.product((1, 2), repeat=m))


def build_block_model(p1: float, p2: float, m: int) -> BlockModel:
    """Probabilities of all blocks of ``m`` independent symbols."""
    if not (0 <= p1 <= 1 and 0 <= p2 <= 1) or abs(p1 + p2 - 1.0) > 1e-9:
        raise InvalidProbabilityError(
            f"Symbol probabilities must lie in [0, 1] and sum to 1, got ({p1}, {p2})"
        )
    check_block_size(m)

    # p1^k p2^(m-k) keeps blocks with equal symbol counts exactly tied.
    blocks = [
        BlockEntry(
            symbols=symbols,
            probability=p1 ** symbols.count(1) * p2 ** symbols.count(2),
        )
        for symbols in block_tuples(m)
    ]
    return BlockModel(block_size=m, p1=p1, p2=p2, blocks=blocks)


def block_entropy(model: BlockModel) -> float:
    """Shannon entropy of the block distribution in bits per block."""
    return float(entropy(model.probabilities, base=2))


def single_symbol_entropy(p1: float, p2: float) -> float:
    """Entropy of one quantizer symbol in bits."""
    return float(entropy([p1, p2], base=2))


def huffman_lengths(probabilities: List[float]) -> List[int]:
    """Optimal code lengths by repeatedly merging the two least probable nodes.

    Ties merge the node with the smaller index first: leaves are indexed by
    their rank, internal nodes by creation order after all leaves.
    """
    n = len(probabilities)
    if n < 2:
        raise DegenerateModelError("Huffman coding needs at least two blocks")
    if any(not p > 0 for p in probabilities):
        raise DegenerateModelError("Huffman coding needs strictly positive probabilities")

    heap: List[Tuple[float, int]] = [(p, i) for i, p in enumerate(probabilities)]
    heapq.heapify(heap)
    children: List[Tuple[int, int]] = []
    while len(heap) > 1:
        weight_a, a = heapq.heappop(heap)
        weight_b, b = heapq.heappop(heap)
        children.append((a, b))
        heapq.heappush(heap, (weight_a + weight_b, n + len(children) - 1))

    # Children are always created before their parent, so walking internal
    # nodes from the root backwards visits every parent before its children.
    depth = [0] * (n + len(children))
    for offset in range(len(children) - 1, -1, -1):
        node_depth = depth[n + offset] + 1
        for child in children[offset]:
            depth[child] = node_depth
    return depth[:n]


def canonical_codes(lengths: List[int]) -> List[str]:
    """Canonical codewords ordered by (length, rank)."""
    order = sorted(range(len(lengths)), key=lambda i: (lengths[i], i))
    codes = [""] * len(lengths)
    code = 0
    previous = lengths[order[0]]
    for i in order:
        code <<= lengths[i] - previous
        codes[i] = format(code, f"0{lengths[i]}b")
        previous = lengths[i]
        code += 1
    return codes


def build_huffman(model: BlockModel) -> CodeBook:
    """Extended Huffman codebook for ``model`` with canonical codewords."""
    probabilities = [b.probability for b in model.blocks]
    lengths = huffman_lengths(probabilities)
    codes = canonical_codes(lengths)

    entries = [
        CodeEntry(symbols=block.symbols, code=code, length=length)
        for block, code, length in zip(model.blocks, codes, lengths)
    ]
    per_block = math.fsum(p * l for p, l in zip(probabilities, lengths))
    codebook = CodeBook(
        block_size=model.block_size,
        entries=entries,
        avg_bits_per_block=per_block,
        avg_bits_per_symbol=per_block / model.block_size,
    )
    logger.debug("Codebook built", extra={"extra_fields": {
        "block_size": model.block_size,
        "max_length": max(lengths),
        "avg_bits_per_symbol": codebook.avg_bits_per_symbol,
    }})
    return codebook


def average_bit_rate(codebook: CodeBook, model: BlockModel) -> Tuple[float, float]:
    """Expected code length per block and per symbol under ``model``."""
    if codebook.block_size != model.block_size or any(
        e.symbols != b.symbols for e, b in zip(codebook.entries, model.blocks)
    ):
        raise MismatchedModelError(
            f"Codebook for M={codebook.block_size} does not match model for M={model.block_size}"
        )
    per_block = math.fsum(
        b.probability * e.length for b, e in zip(model.blocks, codebook.entries)
    )
    return per_block, per_block / model.block_size


def redundancy(codebook: CodeBook, model: BlockModel) -> float:
    """Gap between the per-symbol rate and the per-symbol entropy."""
    _, per_symbol = average_bit_rate(codebook, model)
    return per_symbol - block_entropy(model) / model.block_size


def design_codebook(
    design: QuantizerDesign, m: int, model: Optional[BlockModel] = None
) -> Tuple[BlockModel, CodeBook]:
    """Block model and Huffman codebook for a designed quantizer."""
    if model is None:
        model = build_block_model(design.p1, design.p2, m)
    return model, build_huffman(model)
