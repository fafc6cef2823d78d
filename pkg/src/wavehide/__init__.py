"""Reversible data hiding in two-level integer Haar sub-band difference histograms."""

from .errors import (
    CapacityError,
    CorruptionError,
    FormatError,
    PixelOverflowError,
    VerificationError,
    WavehideError,
)
from .imageio import Image, gen_synthetic, read_pgm, write_pgm
from .keyfile import KeyData, decode_key, encode_key
from .metrics import psnr
from .pipeline import EmbedOptions, EmbedResult, capacity, embed, extract, verify

__version__ = "0.1.0"

__all__ = [
    "CapacityError", "CorruptionError", "EmbedOptions", "EmbedResult", "FormatError", "Image",
    "KeyData", "PixelOverflowError", "VerificationError", "WavehideError", "capacity",
    "decode_key", "embed", "encode_key", "extract", "gen_synthetic", "psnr", "read_pgm",
    "verify", "write_pgm",
]
