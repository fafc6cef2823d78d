"""Four-carrier embedding and extraction over the two-level pyramid.

Carriers, in embedding order, with their reference bands:

    HL  <- LH            HH  <- LH            HH2 <- LH2
    LH  <- HL (already marked)

Extraction runs HH2, LH, HL, HH: LH has to come back before HL and HH
because it was their reference, and the marked HL it was itself
differenced against is still intact at that point.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import keyfile
from .errors import CapacityError, CorruptionError, PixelOverflowError, VerificationError
from .haar import SubbandPyramid, forward_2level, inverse_2level
from .histogram import MAX_THRESHOLD, capacity_of, embed_into_carrier, extract_from_carrier, tamper_heuristic
from .imageio import Image
from .keyfile import EMBED_ORDER, CarrierRecord, KeyData, OverflowInfo, crc32
from .metrics import psnr
from .overflow import DEFAULT_GUARD, MAX_GUARD, check_range, narrow, widen

log = logging.getLogger(__name__)

# "auto" resolves to strict or to narrow with the smallest guard that keeps pixels in range
OVERFLOW_CHOICES = ("strict", "narrow", "auto")


@dataclass(frozen=True)
class EmbedOptions:
    T: int = 0
    overflow_mode: str = "narrow"
    G: int = DEFAULT_GUARD
    compress_key: bool = True

    def __post_init__(self):
        if not 0 <= self.T <= MAX_THRESHOLD:
            raise ValueError(f"threshold {self.T} outside [0, {MAX_THRESHOLD}]")
        if self.overflow_mode not in OVERFLOW_CHOICES:
            raise ValueError(f"overflow mode must be one of {OVERFLOW_CHOICES}, got {self.overflow_mode!r}")
        if not 1 <= self.G <= MAX_GUARD:
            raise ValueError(f"guard G must lie in [1, {MAX_GUARD}], got {self.G}")


@dataclass
class EmbedResult:
    marked: Image
    key: KeyData
    key_bytes: bytes
    stats: dict = field(default_factory=dict)


@dataclass
class CapacityReport:
    T: int
    per_carrier: dict
    total_bits: int
    bpp: float
    overhead_bits: int


@dataclass
class VerifyReport:
    crc_ok: bool
    heuristic_suspect: bool
    errors: dict

    @property
    def ok(self) -> bool:
        return self.crc_ok and not self.errors


def _reference(pyr: SubbandPyramid, carrier: str) -> np.ndarray:
    return {"HL": pyr.LH, "HH": pyr.LH, "HH2": pyr.LH2, "LH": pyr.HL}[carrier]


def _seal(payload: bytes, cover: Image) -> int:
    # payload CRC continued over the cover raster, so tail-only edits are caught too
    return crc32(cover.pixels.tobytes(), crc32(payload))


def _mark_pyramid(pyr: SubbandPyramid, T: int, payload_bits: np.ndarray):
    """Embed into all four carriers; bits past the payload are zero padding."""
    out = pyr.copy()
    records = []
    pos = 0
    for name in EMBED_ORDER:
        ref = _reference(out, name)
        dest = getattr(out, name)
        cap = capacity_of(ref - dest, T)
        bits = np.zeros(cap, dtype=np.uint8)
        chunk = payload_bits[pos : pos + cap]
        bits[: chunk.size] = chunk
        pos += cap
        marked, flags, f = embed_into_carrier(ref, dest, T, bits)
        setattr(out, name, marked)
        records.append(CarrierRecord(name, cap, f, flags))
    return out, records


def _prepare(img: Image, opts: EmbedOptions):
    if img.width % 4 or img.height % 4:
        raise ValueError(f"dimensions must be multiples of 4, got {img.width}x{img.height}")
    if opts.overflow_mode == "narrow":
        cover, loc = narrow(img, opts.G)
        return cover, OverflowInfo("narrow", opts.G, loc)
    return img, OverflowInfo("strict", 0)


def _candidates(opts: EmbedOptions):
    if opts.overflow_mode != "auto":
        return [opts]
    return [replace(opts, overflow_mode="strict")] + [
        replace(opts, overflow_mode="narrow", G=g) for g in range(1, MAX_GUARD + 1)
    ]


def embed(img: Image, payload: bytes, opts: EmbedOptions | None = None) -> EmbedResult:
    opts = opts or EmbedOptions()
    if opts.overflow_mode == "auto":
        # narrowing changes capacity too, so a candidate may fail either way
        failures = []
        for cand in _candidates(opts):
            try:
                return _embed(img, payload, cand)
            except (PixelOverflowError, CapacityError) as exc:
                failures.append(exc)
        caps = [e for e in failures if isinstance(e, CapacityError)]
        raise max(caps, key=lambda e: e.capacity_bits) if caps else failures[-1]
    return _embed(img, payload, opts)


def _embed(img: Image, payload: bytes, opts: EmbedOptions) -> EmbedResult:
    payload = bytes(payload)
    cover, overflow = _prepare(img, opts)
    payload_bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))

    marked_pyr, records = _mark_pyramid(forward_2level(cover), opts.T, payload_bits)
    total = sum(r.capacity_bits for r in records)
    if payload_bits.size > total:
        raise CapacityError(
            f"payload of {payload_bits.size} bits exceeds capacity of {total} bits "
            f"({total // 8} bytes) at T={opts.T}",
            capacity_bits=total,
        )

    plane = inverse_2level(marked_pyr)
    bad = check_range(plane)
    if bad:
        raise PixelOverflowError(
            f"{len(bad)} marked pixels fall outside [0, 255] (first at {bad[0]}); "
            "use overflow mode 'narrow' or a larger guard",
            coords=bad,
        )
    marked = Image(plane.astype(np.uint8))

    key = KeyData(
        T=opts.T, width=img.width, height=img.height,
        payload_bit_length=int(payload_bits.size), payload_crc32=_seal(payload, img),
        overflow=overflow, carriers=records,
    )
    key_bytes = keyfile.encode_key(key, compress=opts.compress_key)
    pixels = img.width * img.height
    stats = {
        "capacity_bits": total,
        "payload_bits": int(payload_bits.size),
        "overhead_bits": 8 * len(key_bytes),
        "psnr_db": psnr(img, marked),
        "bpp": payload_bits.size / pixels,
    }
    log.debug("embedded %d/%d bits at T=%d", payload_bits.size, total, opts.T)
    return EmbedResult(marked, key, key_bytes, stats)


def capacity(img: Image, T: int, opts: EmbedOptions | None = None) -> CapacityReport:
    """Dry-run embedding with an all-zero payload.

    The LH carrier is differenced against the marked HL, so its capacity
    depends on the bits that went into HL; the figure reported here is
    exact for any payload whose HL share is all zeros (in particular the
    empty payload).
    """
    opts = replace(opts or EmbedOptions(), T=T)
    if opts.overflow_mode == "auto":
        opts = resolve_overflow(img, b"", opts)
    cover, overflow = _prepare(img, opts)
    _, records = _mark_pyramid(forward_2level(cover), T, np.zeros(0, dtype=np.uint8))
    total = sum(r.capacity_bits for r in records)
    key = KeyData(T, img.width, img.height, 0, 0, overflow, records)
    overhead = 8 * len(keyfile.encode_key(key, compress=opts.compress_key))
    return CapacityReport(
        T=T,
        per_carrier={r.carrier: r.capacity_bits for r in records},
        total_bits=total,
        bpp=total / (img.width * img.height),
        overhead_bits=overhead,
    )


def _recover_carriers(pyr: SubbandPyramid, key: KeyData, errors: dict | None = None):
    """Undo all four carriers in causal order.

    With ``errors`` given, failures are recorded per carrier instead of
    raised and the remaining carriers are still attempted where possible.
    """
    rec = {r.carrier: r for r in key.carriers}
    if sorted(rec) != sorted(EMBED_ORDER):
        raise VerificationError("key must describe carriers HL, HH, HH2 and LH exactly once")
    out = pyr.copy()
    bits = {}
    for name in ("HH2", "LH", "HL", "HH"):
        if name in ("HL", "HH") and errors is not None and "LH" in errors:
            errors[name] = "skipped: reference band LH could not be restored"
            continue
        r = rec[name]
        try:
            b, dest = extract_from_carrier(_reference(out, name), getattr(out, name), key.T, r.flags, r.f)
            if b.size != r.capacity_bits:
                raise CorruptionError(f"carrier {name} yielded {b.size} bits, key records {r.capacity_bits}")
        except CorruptionError as exc:
            if errors is None:
                raise CorruptionError(f"carrier {name}: {exc}") from None
            errors[name] = str(exc)
            continue
        bits[name] = b
        setattr(out, name, dest)
    return out, bits


def _check_key(marked: Image, key: KeyData):
    if (marked.width, marked.height) != (key.width, key.height):
        raise VerificationError(
            f"image is {marked.width}x{marked.height}, key expects {key.width}x{key.height}"
        )
    if key.total_capacity < key.payload_bit_length:
        raise VerificationError("key payload length exceeds its carrier capacity")


def _finish(marked: Image, key: KeyData, restored: SubbandPyramid, bits: dict):
    stream = np.concatenate([bits[name] for name in EMBED_ORDER])
    n = key.payload_bit_length
    if np.any(stream[n:]):
        raise VerificationError("padding bits are not zero")
    payload = np.packbits(stream[:n]).tobytes()

    plane = inverse_2level(restored)
    if check_range(plane):
        raise VerificationError("restored cover leaves [0, 255]")
    cover = Image(plane.astype(np.uint8))
    if key.overflow.mode == "narrow":
        try:
            cover = widen(cover, key.overflow.location_map, key.overflow.G)
        except ValueError as exc:
            raise VerificationError(f"location map mismatch: {exc}") from None
    if _seal(payload, cover) != key.payload_crc32:
        raise VerificationError("checksum mismatch: marked image or key was altered")
    return payload, cover


def extract(marked: Image, key: KeyData) -> tuple[bytes, Image]:
    """Recover (payload, original cover); raises on any inconsistency."""
    _check_key(marked, key)
    restored, bits = _recover_carriers(forward_2level(marked), key)
    return _finish(marked, key, restored, bits)


def verify(marked: Image, key: KeyData) -> VerifyReport:
    errors = {}
    try:
        _check_key(marked, key)
    except VerificationError as exc:
        return VerifyReport(False, False, {"image": str(exc)})
    pyr = forward_2level(marked)
    suspect = tamper_heuristic(pyr.LH2 - pyr.HH2)
    try:
        restored, bits = _recover_carriers(pyr, key, errors)
    except VerificationError as exc:
        return VerifyReport(False, suspect, {"key": str(exc)})
    if errors:
        return VerifyReport(False, suspect, errors)
    try:
        _finish(marked, key, restored, bits)
    except VerificationError as exc:
        return VerifyReport(False, suspect, {"checksum": str(exc)})
    return VerifyReport(True, suspect, {})


def resolve_overflow(img: Image, payload: bytes, opts: EmbedOptions) -> EmbedOptions:
    """Concrete options "auto" settles on for this payload."""
    key = embed(img, payload, opts).key
    return replace(opts, overflow_mode=key.overflow.mode, G=key.overflow.G or opts.G)


def capacity_for_bits(img: Image, bits, opts: EmbedOptions | None = None) -> int:
    """Total capacity when the padded bit stream starts with ``bits``.

    Unlike :func:`capacity`, this accounts for the LH carrier seeing an HL
    band marked with these particular bits.
    """
    opts = opts or EmbedOptions()
    if opts.overflow_mode == "auto":
        raise ValueError("resolve 'auto' overflow mode first (see resolve_overflow)")
    cover, _ = _prepare(img, opts)
    _, records = _mark_pyramid(forward_2level(cover), opts.T, np.asarray(bits, dtype=np.uint8))
    return sum(r.capacity_bits for r in records)


def max_payload(img: Image, stream: bytes, opts: EmbedOptions | None = None) -> bytes:
    """Longest prefix of ``stream`` (whole bytes) that fits into ``img``.

    In "auto" overflow mode the first guard setting whose maximal payload
    reconstructs in range wins.
    """
    opts = opts or EmbedOptions()
    if opts.overflow_mode == "auto":
        for cand in _candidates(opts):
            p = max_payload(img, stream, cand)
            try:
                _embed(img, p, cand)
            except PixelOverflowError:
                continue
            return p
        raise PixelOverflowError("no guard setting keeps the marked image in range")
    stream_bits = np.unpackbits(np.frombuffer(bytes(stream), dtype=np.uint8))
    n = capacity_for_bits(img, stream_bits, opts) // 8
    # truncation can only change bits that land in LH's share, but re-check to be exact
    while n > 0 and capacity_for_bits(img, stream_bits[: 8 * n], opts) < 8 * n:
        n -= 1
    return bytes(stream[:n])
