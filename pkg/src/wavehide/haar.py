"""Two-level integer Haar transform (S-transform lifting).

Planes are 2-D int64 arrays indexed [y, x]. Every transform here is an
exact bijection on integer planes, so any integer edit of a coefficient
survives the round trip through pixels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imageio import Image

DETAIL_BANDS = ("LH", "HL", "HH")
LEVEL2_BANDS = ("LL2", "LH2", "HL2", "HH2")


def lift_pair_forward(a, b):
    """(a, b) -> (s, d) with d = a - b and s = b + floor(d / 2)."""
    d = a - b
    s = b + (d >> 1)
    return s, d


def lift_pair_inverse(s, d):
    b = s - (d >> 1)
    a = b + d
    return a, b


def as_plane(p) -> np.ndarray:
    if isinstance(p, Image):
        p = p.pixels
    return np.asarray(p, dtype=np.int64)


def forward_1level(p) -> dict[str, np.ndarray]:
    """Rows first, then columns of each half.

    LL/LH are the column low/high parts of the row lows; HL/HH the column
    low/high parts of the row highs.
    """
    p = as_plane(p)
    h, w = p.shape
    if h % 2 or w % 2:
        raise ValueError(f"plane dimensions must be even, got {w}x{h}")
    lo, hi = lift_pair_forward(p[:, 0::2], p[:, 1::2])
    ll, lh = lift_pair_forward(lo[0::2, :], lo[1::2, :])
    hl, hh = lift_pair_forward(hi[0::2, :], hi[1::2, :])
    return {"LL": ll, "LH": lh, "HL": hl, "HH": hh}


def inverse_1level(bands) -> np.ndarray:
    ll, lh, hl, hh = (as_plane(bands[k]) for k in ("LL", "LH", "HL", "HH"))
    if not (ll.shape == lh.shape == hl.shape == hh.shape):
        raise ValueError(
            f"sub-band size mismatch: {ll.shape}, {lh.shape}, {hl.shape}, {hh.shape}"
        )
    h, w = ll.shape
    lo = np.empty((2 * h, w), dtype=np.int64)
    hi = np.empty((2 * h, w), dtype=np.int64)
    lo[0::2, :], lo[1::2, :] = lift_pair_inverse(ll, lh)
    hi[0::2, :], hi[1::2, :] = lift_pair_inverse(hl, hh)
    out = np.empty((2 * h, 2 * w), dtype=np.int64)
    out[:, 0::2], out[:, 1::2] = lift_pair_inverse(lo, hi)
    return out


@dataclass
class SubbandPyramid:
    """Level-1 details plus the four level-2 bands of the level-1 LL."""

    LH: np.ndarray
    HL: np.ndarray
    HH: np.ndarray
    LL2: np.ndarray
    LH2: np.ndarray
    HL2: np.ndarray
    HH2: np.ndarray
    origin_width: int
    origin_height: int

    def copy(self) -> "SubbandPyramid":
        kw = {k: getattr(self, k).copy() for k in DETAIL_BANDS + LEVEL2_BANDS}
        return SubbandPyramid(origin_width=self.origin_width, origin_height=self.origin_height, **kw)

    def replace(self, **bands) -> "SubbandPyramid":
        out = self.copy()
        for k, v in bands.items():
            if k not in DETAIL_BANDS + LEVEL2_BANDS:
                raise KeyError(k)
            setattr(out, k, as_plane(v).copy())
        return out

    def __eq__(self, other):
        if not isinstance(other, SubbandPyramid):
            return NotImplemented
        return (self.origin_width, self.origin_height) == (other.origin_width, other.origin_height) and all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in DETAIL_BANDS + LEVEL2_BANDS
        )


def forward_2level(img) -> SubbandPyramid:
    p = as_plane(img)
    h, w = p.shape
    if h % 4 or w % 4 or h == 0 or w == 0:
        raise ValueError(f"dimensions must be positive multiples of 4, got {w}x{h}")
    one = forward_1level(p)
    two = forward_1level(one["LL"])
    return SubbandPyramid(
        LH=one["LH"], HL=one["HL"], HH=one["HH"],
        LL2=two["LL"], LH2=two["LH"], HL2=two["HL"], HH2=two["HH"],
        origin_width=w, origin_height=h,
    )


def inverse_2level(pyr: SubbandPyramid) -> np.ndarray:
    q = (pyr.origin_height // 4, pyr.origin_width // 4)
    half = (pyr.origin_height // 2, pyr.origin_width // 2)
    for name in LEVEL2_BANDS:
        if getattr(pyr, name).shape != q:
            raise ValueError(f"{name} has shape {getattr(pyr, name).shape}, expected {q}")
    for name in DETAIL_BANDS:
        if getattr(pyr, name).shape != half:
            raise ValueError(f"{name} has shape {getattr(pyr, name).shape}, expected {half}")
    ll = inverse_1level({"LL": pyr.LL2, "LH": pyr.LH2, "HL": pyr.HL2, "HH": pyr.HH2})
    return inverse_1level({"LL": ll, "LH": pyr.LH, "HL": pyr.HL, "HH": pyr.HH})
