import zlib

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavehide.errors import FormatError
from wavehide.keyfile import (
    EMBED_ORDER,
    CarrierRecord,
    KeyData,
    OverflowInfo,
    crc32,
    decode_key,
    encode_key,
    pack_bits,
    unpack_bits,
)

from oracles import crc32_bitwise


def empty_key(T=0):
    return KeyData(
        T=T, width=4, height=4, payload_bit_length=0, payload_crc32=0,
        overflow=OverflowInfo("strict", 0),
        carriers=[CarrierRecord(name, 0, True) for name in EMBED_ORDER],
    )


bit_lists = st.lists(st.integers(0, 1), max_size=300)


@st.composite
def keys(draw):
    carriers = [
        CarrierRecord(name, draw(st.integers(0, 2**32 - 1)), draw(st.booleans()), draw(bit_lists))
        for name in EMBED_ORDER
    ]
    total = sum(c.capacity_bits for c in carriers)
    mode = draw(st.sampled_from(["strict", "narrow"]))
    return KeyData(
        T=draw(st.integers(0, 1000)),
        width=draw(st.integers(1, 2**32 - 1)),
        height=draw(st.integers(1, 2**32 - 1)),
        payload_bit_length=draw(st.integers(0, total)),
        payload_crc32=draw(st.integers(0, 2**32 - 1)),
        overflow=OverflowInfo(mode, draw(st.integers(1, 64)) if mode == "narrow" else 0, draw(bit_lists)),
        carriers=carriers,
    )


def test_crc_check_values():
    assert crc32(b"") == 0 == crc32_bitwise(b"")
    assert crc32(b"123456789") == 0xCBF43926 == crc32_bitwise(b"123456789")


@given(st.binary(max_size=200))
def test_crc_matches_bitwise_oracle(data):
    assert crc32(data) == crc32_bitwise(data)


@given(st.binary(min_size=1, max_size=64), st.data())
def test_crc_detects_single_bit_flip(data, d):
    i = d.draw(st.integers(0, 8 * len(data) - 1))
    flipped = bytearray(data)
    flipped[i // 8] ^= 1 << (i % 8)
    assert crc32(bytes(flipped)) != crc32(data)


def test_crc_chaining():
    assert crc32(b"6789", crc32(b"12345")) == crc32(b"123456789")


@given(bit_lists)
def test_bit_packing(bits):
    packed = pack_bits(bits)
    assert len(packed) == (len(bits) + 7) // 8
    assert unpack_bits(packed, len(bits)).tolist() == bits


def test_pack_msb_first():
    assert pack_bits([1, 0, 0, 0, 0, 0, 0, 1, 1]) == bytes([0x81, 0x80])


def test_store_mode_size():
    # 28 header + 6 overflow + 4 x 10 carrier + 4 crc
    assert len(encode_key(empty_key(), compress=False)) == 78


def test_store_mode_layout():
    k = empty_key(T=7)
    k.overflow = OverflowInfo("narrow", 24, [1, 0, 1])
    k.carriers[1].flags = np.array([1, 1], dtype=np.uint8)
    raw = encode_key(k, compress=False)
    assert raw[:4] == b"RDHK" and raw[4] == 1 and raw[5] == 0
    assert int.from_bytes(raw[6:8], "little") == 7
    assert raw[28] == 1 and raw[29] == 24 and int.from_bytes(raw[30:34], "little") == 3
    assert raw[34] == 0b10100000
    # HH record follows the empty HL record
    assert raw[45] == 1 and int.from_bytes(raw[51:55], "little") == 2 and raw[55] == 0b11000000
    assert int.from_bytes(raw[-4:], "little") == crc32_bitwise(raw[:-4])


@pytest.mark.parametrize("compress", [False, True])
@given(k=keys())
def test_round_trip(k, compress):
    assert decode_key(encode_key(k, compress=compress)) == k


def test_compressed_stream_follows_magic():
    k = empty_key()
    blob = encode_key(k, compress=True)
    body = zlib.decompress(blob[4:])
    assert body[1] & 1
    assert decode_key(blob) == k


def _corruptions(blob):
    for i in range(len(blob)):
        for mask in (0x01, 0x80, 0xFF):
            bad = bytearray(blob)
            bad[i] ^= mask
            yield bytes(bad)


def _sample_key():
    k = empty_key(T=3)
    k.overflow = OverflowInfo("narrow", 8, np.arange(40) % 3 == 0)
    return k


def test_any_corrupted_byte_is_rejected_store_mode():
    for bad in _corruptions(encode_key(_sample_key(), compress=False)):
        with pytest.raises(FormatError):
            decode_key(bad)


def test_corrupted_compressed_key_never_decodes_differently():
    # DEFLATE has don't-care bits (final-byte padding); flipping one of those
    # yields the same uncompressed bytes, which is harmless
    k = _sample_key()
    rejected = 0
    blobs = list(_corruptions(encode_key(k, compress=True)))
    for bad in blobs:
        try:
            assert decode_key(bad) == k
        except FormatError:
            rejected += 1
    assert rejected >= 0.9 * len(blobs)


def test_decode_errors():
    blob = encode_key(empty_key(), compress=False)
    with pytest.raises(FormatError, match="magic"):
        decode_key(b"XXXX" + blob[4:])
    with pytest.raises(FormatError):
        decode_key(blob[:-5])
    with pytest.raises(FormatError):
        decode_key(b"RDHK")
    bumped = bytearray(blob[:-4])
    bumped[4] = 9
    bumped += crc32(bytes(bumped)).to_bytes(4, "little")
    with pytest.raises(FormatError, match="version"):
        decode_key(bytes(bumped))


def test_encode_rejects_inconsistent_key():
    k = empty_key()
    k.payload_bit_length = 1
    with pytest.raises(ValueError):
        encode_key(k)
    k = empty_key()
    k.carriers = k.carriers[:3]
    with pytest.raises(ValueError):
        encode_key(k)
