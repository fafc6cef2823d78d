"""Difference-histogram shifting on one carrier sub-band.

A carrier is a destination plane paired with a read-only reference plane.
The difference D = ref - dest drives everything; only dest is ever
modified. Embedding runs

    raw --phase1_shift--> preshifted --embed_levels--> embedded --centralize--> centralized

and extraction walks the same chain backwards. Each step is vectorised
but bit-identical to the scalar rules: levels are visited from T down to
0, and within a level coefficients are visited in raster order, which
fixes the canonical payload bit order.

Mark values: a level-l coefficient becomes +-(l + 4) for bit 1 and
+-(l + 8) for bit 0 (level 0 only moves upward). Magnitudes in [8, T + 4]
are reachable both ways; each such coefficient gets one flag bit (1 for a
+4 mark, 0 for a +8 mark), listed in raster order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import CorruptionError

STAGES = ("raw", "preshifted", "embedded", "centralized")
MAX_THRESHOLD = 1000


def diff_map(ref, dest) -> np.ndarray:
    ref = np.asarray(ref, dtype=np.int64)
    dest = np.asarray(dest, dtype=np.int64)
    if ref.shape != dest.shape:
        raise ValueError(f"reference {ref.shape} and carrier {dest.shape} differ in size")
    return ref - dest


def histogram(d) -> dict[int, int]:
    """Sparse bin -> count map; only occupied bins are present."""
    values, counts = np.unique(np.asarray(d, dtype=np.int64), return_counts=True)
    return dict(zip(values.tolist(), counts.tolist()))


def capacity_of(d, T: int) -> int:
    if T < 0:
        raise ValueError("threshold must be non-negative")
    return int(np.count_nonzero(np.abs(np.asarray(d, dtype=np.int64)) <= T))


def ambiguity_mask(d, T: int) -> np.ndarray:
    """Coefficients whose mark magnitude needs a flag bit: 8 <= |D| <= T + 4."""
    a = np.abs(d)
    return (a >= 8) & (a <= T + 4)


@dataclass(frozen=True)
class CarrierState:
    ref: np.ndarray
    dest: np.ndarray
    T: int
    f: bool = False
    stage: str = "raw"

    def __post_init__(self):
        ref = np.asarray(self.ref, dtype=np.int64)
        dest = np.asarray(self.dest, dtype=np.int64)
        if ref.shape != dest.shape:
            raise ValueError(f"reference {ref.shape} and carrier {dest.shape} differ in size")
        if not 0 <= self.T <= MAX_THRESHOLD:
            raise ValueError(f"threshold {self.T} outside [0, {MAX_THRESHOLD}]")
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        object.__setattr__(self, "ref", ref)
        object.__setattr__(self, "dest", dest)

    @property
    def diff(self) -> np.ndarray:
        return self.ref - self.dest

    def __eq__(self, other):
        if not isinstance(other, CarrierState):
            return NotImplemented
        return (
            (self.T, self.f, self.stage) == (other.T, other.f, other.stage)
            and np.array_equal(self.ref, other.ref)
            and np.array_equal(self.dest, other.dest)
        )


def _expect(state: CarrierState, stage: str):
    if state.stage != stage:
        raise ValueError(f"carrier is in stage {state.stage!r}, expected {stage!r}")


def phase1_shift(state: CarrierState) -> CarrierState:
    """Push |D| > T outward by 8, vacating +-[T+1, T+8]."""
    _expect(state, "raw")
    d = state.diff
    T = state.T
    dest = state.dest - 8 * (d >= T + 1) + 8 * (d <= -(T + 1))
    return replace(state, dest=dest, stage="preshifted")


def unshift_tails(state: CarrierState) -> CarrierState:
    _expect(state, "preshifted")
    d = state.diff
    T = state.T
    dest = state.dest + 8 * (d >= T + 1) - 8 * (d <= -(T + 1))
    return replace(state, dest=dest, stage="raw")


def _as_bits(bits) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64).ravel()
    if b.size and (b.min() < 0 or b.max() > 1):
        raise ValueError("bit values must be 0 or 1")
    return b.astype(np.uint8)


def _embed_order(d: np.ndarray, T: int) -> np.ndarray:
    """Flat indices of in-band coefficients: descending |D|, raster within a level."""
    flat = d.ravel()
    idx = np.flatnonzero(np.abs(flat) <= T)
    lev = np.abs(flat[idx])
    return idx[np.lexsort((idx, -lev))]


def embed_levels(state: CarrierState, bits) -> tuple[CarrierState, np.ndarray]:
    """Consume exactly capacity_of(D, T) bits; returns the embedded state and its flag ledger."""
    _expect(state, "preshifted")
    bits = _as_bits(bits)
    d = state.diff
    order = _embed_order(d, state.T)
    if bits.size != order.size:
        raise ValueError(f"carrier takes exactly {order.size} bits, got {bits.size}")
    step = np.where(bits == 1, 4, 8)
    # level 0 (D == 0) moves upward like the positive side
    sign = np.where(d.ravel()[order] < 0, -1, 1)
    dest = state.dest.copy().ravel()
    dest[order] -= sign * step
    dest = dest.reshape(d.shape)

    marked_bit = np.zeros(d.size, dtype=np.uint8)
    marked_bit[order] = bits
    zone = ambiguity_mask(state.ref - dest, state.T).ravel()
    flags = marked_bit[zone]
    return replace(state, dest=dest, f=True, stage="embedded"), flags


def centralize(state: CarrierState) -> CarrierState:
    """Pull every difference 4 bins toward zero (bins -4..3 are empty after full embedding)."""
    _expect(state, "embedded")
    if not state.f:
        raise ValueError("centralization requires a fully embedded carrier (f = 1)")
    d = state.diff
    if np.any(d == 0):
        raise ValueError("zero difference present; carrier is not fully embedded")
    dest = state.dest + 4 * (d > 0) - 4 * (d < 0)
    return replace(state, dest=dest, stage="centralized")


def decentralize(state: CarrierState) -> CarrierState:
    _expect(state, "centralized")
    d = state.diff
    dest = state.dest - 4 * (d >= 0) + 4 * (d < 0)
    return replace(state, dest=dest, stage="embedded")


def extract_levels(state: CarrierState, flags) -> tuple[np.ndarray, CarrierState]:
    """Classify every mark, restore it to +-l and return bits in embedding order."""
    _expect(state, "embedded")
    T = state.T
    flags = _as_bits(flags)
    d = state.diff.ravel()
    mag = np.abs(d)
    neg = d < 0

    tail = mag >= T + 9
    lev1 = mag - 4
    lev0 = mag - 8
    ok1 = (lev1 >= 0) & (lev1 <= T) & ~(neg & (lev1 == 0))
    ok0 = (lev0 >= 0) & (lev0 <= T) & ~(neg & (lev0 == 0))

    zone = ambiguity_mask(d, T)
    n_zone = int(np.count_nonzero(zone))
    if flags.size != n_zone:
        kind = "underrun" if flags.size < n_zone else "overrun"
        raise CorruptionError(f"flag {kind}: {n_zone} ambiguous marks, {flags.size} flag bits")

    bit = np.where(ok1, 1, 0).astype(np.uint8)
    bit[zone] = flags
    legal = np.where(bit == 1, ok1, ok0)
    bad = ~tail & ~legal
    if np.any(bad):
        pos = int(np.flatnonzero(bad)[0])
        raise CorruptionError(f"unclassifiable difference {int(d[pos])} at flat index {pos} (T={T})")

    marks = np.flatnonzero(~tail)
    lev = np.where(bit == 1, lev1, lev0)[marks]
    sgn = np.where(neg[marks], -1, 1)
    dest = state.dest.copy().ravel()
    dest[marks] = state.ref.ravel()[marks] - sgn * lev

    order = np.lexsort((marks, -lev))
    out_bits = bit[marks][order]
    new = replace(state, dest=dest.reshape(state.dest.shape), stage="preshifted")
    return out_bits, new


def embed_into_carrier(ref, dest, T: int, bits) -> tuple[np.ndarray, np.ndarray, bool]:
    """phase1_shift -> embed_levels -> centralize; returns (marked dest, flags, f)."""
    s = phase1_shift(CarrierState(ref, dest, T))
    s, flags = embed_levels(s, bits)
    if s.f:
        s = centralize(s)
    return s.dest, flags, s.f


def extract_from_carrier(ref, marked, T: int, flags, f: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of embed_into_carrier; returns (bits in embedding order, original dest)."""
    if f:
        s = decentralize(CarrierState(ref, marked, T, f=True, stage="centralized"))
    else:
        s = CarrierState(ref, marked, T, f=False, stage="embedded")
    bits, s = extract_levels(s, flags)
    s = unshift_tails(s)
    return bits, s.dest


def tamper_heuristic(d) -> bool:
    """Advisory only: flags a difference map with more than one value at -1.

    Legitimate centralised carriers put level-1 bit-1 marks exactly there,
    so a True result is not proof of tampering.
    """
    return int(np.count_nonzero(np.asarray(d) == -1)) > 1
