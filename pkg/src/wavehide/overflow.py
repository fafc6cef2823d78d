"""Reversible histogram narrowing that keeps marked pixels inside [0, 255].

Pixels below G are lifted by G and pixels above 255 - G are lowered by G,
so the narrowed image lies in [G, 255 - G]. Every pixel that ends up in
one of the two ambiguous bands [G, 2G) and (255 - 2G, 255 - G] gets one
location-map bit (1 = it was moved), in raster order.
"""

from __future__ import annotations

import numpy as np

from .imageio import Image

DEFAULT_GUARD = 24
MAX_GUARD = 64


def _check_guard(G: int):
    if not 0 < G <= MAX_GUARD:
        raise ValueError(f"guard G must lie in [1, {MAX_GUARD}], got {G}")


def _bands(p: np.ndarray, G: int) -> np.ndarray:
    return (p < 2 * G) | (p > 255 - 2 * G)


def narrow(img: Image, G: int = DEFAULT_GUARD) -> tuple[Image, np.ndarray]:
    _check_guard(G)
    p = img.pixels.astype(np.int64)
    low = p < G
    high = p > 255 - G
    loc = (low | high)[_bands(p, G)].astype(np.uint8)
    out = p + G * low - G * high
    return Image(out.astype(np.uint8)), loc


def widen(img: Image, location_map, G: int = DEFAULT_GUARD) -> Image:
    _check_guard(G)
    loc = np.asarray(location_map, dtype=np.uint8).ravel()
    p = img.pixels.astype(np.int64)
    # narrowed pixels never sit outside [G, 255 - G], so these are exactly the mapped ones
    amb = ((p >= G) & (p < 2 * G)) | ((p > 255 - 2 * G) & (p <= 255 - G))
    if int(amb.sum()) != loc.size:
        raise ValueError(f"location map has {loc.size} bits, image needs {int(amb.sum())}")
    moved = np.zeros(p.shape, dtype=bool)
    moved[amb] = loc.astype(bool)
    out = p - G * (moved & (p < 128)) + G * (moved & (p >= 128))
    return Image(out.astype(np.uint8))


def check_range(p) -> list[tuple[int, int]]:
    """(x, y) coordinates of every value outside [0, 255]."""
    p = np.asarray(p.pixels if isinstance(p, Image) else p)
    ys, xs = np.nonzero((p < 0) | (p > 255))
    return list(zip(xs.tolist(), ys.tolist()))
