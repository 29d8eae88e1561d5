"""LAPQ - asymmetric two-level quantizer design, extended Huffman coding and verification."""
