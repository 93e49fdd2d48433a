"""Decorated Teichmueller spaces, Ptolemy and modular groupoids, and their quantization."""

__version__ = "0.1.0"
