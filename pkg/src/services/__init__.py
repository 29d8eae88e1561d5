"""Service modules."""

from .block_code import BlockModel, CodeBook, build_block_model, build_huffman
from .codec import BitStream, decode, encode
from .quantizer_core import QuantizerDesign, design_for_distortion, solve_threshold

__all__ = [
    "BitStream",
    "BlockModel",
    "CodeBook",
    "QuantizerDesign",
    "build_block_model",
    "build_huffman",
    "decode",
    "design_for_distortion",
    "encode",
    "solve_threshold",
]
