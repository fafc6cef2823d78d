"""8-bit grayscale images: binary PGM (P5) I/O and synthetic test images."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import FormatError

SYNTHETIC_KINDS = ("flat", "gradient", "blobs", "noise")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True, eq=False)
class Image:
    """Grayscale image backed by a (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] == 0 or px.shape[1] == 0:
            raise ValueError(f"image must be a non-empty 2-D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("samples must lie in [0, 255]")
            px = px.astype(np.uint8)
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_samples(cls, width: int, height: int, samples) -> "Image":
        if isinstance(samples, (bytes, bytearray)):
            arr = np.frombuffer(bytes(samples), dtype=np.uint8)
        else:
            arr = np.asarray(samples)
        if arr.size != width * height:
            raise ValueError(f"expected {width * height} samples, got {arr.size}")
        return cls(arr.reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def samples(self) -> list[int]:
        return self.pixels.ravel().tolist()

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"Image({self.width}x{self.height})"


# header tokens are separated by whitespace; '#' starts a comment running to end of line
_TOKEN = re.compile(rb"\s*(?:#[^\n\r]*[\n\r]\s*)*(\S+)")


def read_pgm(data: bytes) -> Image:
    """Parse a binary P5 PGM with maxval 255. Header comments are tolerated."""
    data = bytes(data)
    pos = 0
    tokens = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise FormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic, w, h, maxval = tokens
    if magic != b"P5":
        raise FormatError(f"not a binary PGM (magic {magic!r})")
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError:
        raise FormatError("non-numeric PGM header field") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"invalid PGM dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval} (only 255)")
    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise FormatError("missing whitespace after PGM header")
    pos += 1
    n = width * height
    raster = data[pos : pos + n]
    if len(raster) < n:
        raise FormatError(f"truncated pixel data: expected {n} bytes, got {len(raster)}")
    return Image(np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy())


def write_pgm(img: Image) -> bytes:
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def load_pgm(path) -> Image:
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(img: Image, path) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))


class XorShift64Star:
    """xorshift64* generator (Vigna 2016); the state must be non-zero."""

    MULT = 0x2545F4914F6CDD1D

    def __init__(self, seed: int):
        seed &= _MASK64
        # zero is a fixed point of the xorshift step
        self.state = seed if seed else 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK64
        x ^= x >> 27
        self.state = x
        return (x * self.MULT) & _MASK64

    def next_float(self) -> float:
        """Uniform in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def bytes(self, n: int) -> bytes:
        out = bytearray()
        while len(out) < n:
            out += self.next_u64().to_bytes(8, "little")
        return bytes(out[:n])


def gen_synthetic(kind: str, width: int, height: int, seed: int = 0) -> Image:
    """Deterministic synthetic cover image.

    flat: every sample 128. gradient: floor(255*x/(width-1)) along each row.
    blobs: eight Gaussian bumps over a mid-gray base, clamped to [64, 192].
    noise: uniform bytes, the top byte of each xorshift64* output.
    """
    if width <= 0 or height <= 0 or width % 4 or height % 4:
        raise ValueError(f"dimensions must be positive multiples of 4, got {width}x{height}")
    if kind == "flat":
        px = np.full((height, width), 128, dtype=np.uint8)
    elif kind == "gradient":
        x = np.arange(width, dtype=np.int64)
        row = (255 * x) // (width - 1)
        px = np.broadcast_to(row, (height, width)).astype(np.uint8)
    elif kind == "blobs":
        rng = XorShift64Star(seed)
        yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
        field = np.full((height, width), 128.0)
        scale = min(width, height)
        for _ in range(8):
            cx = rng.next_float() * width
            cy = rng.next_float() * height
            sigma = scale * (0.06 + 0.2 * rng.next_float())
            amp = -96.0 + 192.0 * rng.next_float()
            field += amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2.0 * sigma * sigma))
        px = np.clip(np.floor(field + 0.5), 64, 192).astype(np.uint8)
    elif kind == "noise":
        rng = XorShift64Star(seed)
        vals = [rng.next_u64() >> 56 for _ in range(width * height)]
        px = np.array(vals, dtype=np.uint8).reshape(height, width)
    else:
        raise ValueError(f"unknown synthetic kind {kind!r}; expected one of {SYNTHETIC_KINDS}")
    return Image(px)
