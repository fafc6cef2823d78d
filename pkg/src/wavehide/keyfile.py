"""Binary side-information ("key") file.

Store-mode layout, all integers little-endian::

    "RDHK" | version u8 | flags u8 | T u16 | width u32 | height u32
    | payload_bit_length u64 | payload_crc32 u32
    | overflow mode u8 | G u8 | map bit-count u32 | map bytes
    | 4 x (carrier id u8 | capacity u32 | f u8 | flag bit-count u32 | flag bytes)
    | CRC-32 of every preceding byte

Bit sequences are packed MSB-first and zero-padded to whole bytes. With
bit 0 of ``flags`` set, everything after the magic is replaced by its
zlib (DEFLATE) compression; the CRC is computed over the uncompressed
bytes.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError

MAGIC = b"RDHK"
VERSION = 1
FLAG_COMPRESSED = 0x01

CARRIER_IDS = {"HL": 0, "HH": 1, "HH2": 2, "LH": 3}
CARRIER_NAMES = {v: k for k, v in CARRIER_IDS.items()}
EMBED_ORDER = ("HL", "HH", "HH2", "LH")

OVERFLOW_MODES = {"strict": 0, "narrow": 1}
OVERFLOW_NAMES = {v: k for k, v in OVERFLOW_MODES.items()}

_HEAD = struct.Struct("<BBHIIQI")
_OVERFLOW = struct.Struct("<BBI")
_CARRIER = struct.Struct("<BIBI")
_CRC = struct.Struct("<I")


def crc32(data: bytes, value: int = 0) -> int:
    """Standard CRC-32 (IEEE, reflected, init and xor-out 0xFFFFFFFF).

    ``value`` continues a running checksum over concatenated inputs.
    """
    return zlib.crc32(data, value) & 0xFFFFFFFF


def pack_bits(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def unpack_bits(data: bytes, count: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=count)


def _bits(v) -> np.ndarray:
    return np.asarray(v, dtype=np.uint8).ravel()


@dataclass(eq=False)
class CarrierRecord:
    carrier: str
    capacity_bits: int
    f: bool
    flags: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))

    def __post_init__(self):
        if self.carrier not in CARRIER_IDS:
            raise ValueError(f"unknown carrier {self.carrier!r}")
        self.flags = _bits(self.flags)

    def __eq__(self, other):
        if not isinstance(other, CarrierRecord):
            return NotImplemented
        return (self.carrier, self.capacity_bits, bool(self.f)) == (
            other.carrier, other.capacity_bits, bool(other.f),
        ) and np.array_equal(self.flags, other.flags)


@dataclass(eq=False)
class OverflowInfo:
    mode: str = "strict"
    G: int = 0
    location_map: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.uint8))

    def __post_init__(self):
        if self.mode not in OVERFLOW_MODES:
            raise ValueError(f"unknown overflow mode {self.mode!r}")
        self.location_map = _bits(self.location_map)

    def __eq__(self, other):
        if not isinstance(other, OverflowInfo):
            return NotImplemented
        return (self.mode, self.G) == (other.mode, other.G) and np.array_equal(
            self.location_map, other.location_map
        )


@dataclass(eq=False)
class KeyData:
    T: int
    width: int
    height: int
    payload_bit_length: int
    payload_crc32: int
    overflow: OverflowInfo
    carriers: list[CarrierRecord]
    version: int = VERSION

    @property
    def total_capacity(self) -> int:
        return sum(c.capacity_bits for c in self.carriers)

    def carrier(self, name: str) -> CarrierRecord:
        for c in self.carriers:
            if c.carrier == name:
                return c
        raise KeyError(name)

    def __eq__(self, other):
        if not isinstance(other, KeyData):
            return NotImplemented
        scalars = ("version", "T", "width", "height", "payload_bit_length", "payload_crc32")
        return (
            all(getattr(self, k) == getattr(other, k) for k in scalars)
            and self.overflow == other.overflow
            and self.carriers == other.carriers
        )


def encode_key(k: KeyData, compress: bool = True) -> bytes:
    if len(k.carriers) != 4:
        raise ValueError(f"expected 4 carrier records, got {len(k.carriers)}")
    if k.total_capacity < k.payload_bit_length:
        raise ValueError("payload longer than the summed carrier capacity")
    flags = FLAG_COMPRESSED if compress else 0
    parts = [
        _HEAD.pack(k.version, flags, k.T, k.width, k.height, k.payload_bit_length, k.payload_crc32),
        _OVERFLOW.pack(OVERFLOW_MODES[k.overflow.mode], k.overflow.G, k.overflow.location_map.size),
        pack_bits(k.overflow.location_map),
    ]
    for c in k.carriers:
        parts.append(_CARRIER.pack(CARRIER_IDS[c.carrier], c.capacity_bits, int(bool(c.f)), c.flags.size))
        parts.append(pack_bits(c.flags))
    body = b"".join(parts)
    body += _CRC.pack(crc32(MAGIC + body))
    if compress:
        return MAGIC + zlib.compress(body, 9)
    return MAGIC + body


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError("truncated key file")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))


def decode_key(data: bytes) -> KeyData:
    data = bytes(data)
    if len(data) < len(MAGIC) or data[:4] != MAGIC:
        raise FormatError("bad magic: not a key file")
    body = data[4:]
    if not body:
        raise FormatError("truncated key file")
    if body[0] != VERSION:
        # store-mode bodies open with the version byte; anything else must be a zlib stream
        try:
            body = zlib.decompress(body)
        except zlib.error:
            raise FormatError(f"unsupported version {body[0]} or corrupt compressed key") from None
        if not body or not body[1] & FLAG_COMPRESSED:
            raise FormatError("compressed key without the compression flag")
    if len(body) < _CRC.size:
        raise FormatError("truncated key file")
    (stored,) = _CRC.unpack(body[-4:])
    if crc32(MAGIC + body[:-4]) != stored:
        raise FormatError("key checksum mismatch")

    r = _Reader(body[:-4])
    version, _flags, T, width, height, nbits, pcrc = r.unpack(_HEAD)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    mode, G, map_len = r.unpack(_OVERFLOW)
    if mode not in OVERFLOW_NAMES:
        raise FormatError(f"unknown overflow mode {mode}")
    loc = unpack_bits(r.take((map_len + 7) // 8), map_len)
    carriers = []
    for _ in range(4):
        cid, cap, f, nflags = r.unpack(_CARRIER)
        if cid not in CARRIER_NAMES:
            raise FormatError(f"unknown carrier id {cid}")
        carriers.append(CarrierRecord(CARRIER_NAMES[cid], cap, bool(f), unpack_bits(r.take((nflags + 7) // 8), nflags)))
    if r.pos != len(r.buf):
        raise FormatError(f"{len(r.buf) - r.pos} trailing bytes in key file")
    return KeyData(
        T=T, width=width, height=height, payload_bit_length=nbits, payload_crc32=pcrc,
        overflow=OverflowInfo(OVERFLOW_NAMES[mode], G, loc), carriers=carriers, version=version,
    )
