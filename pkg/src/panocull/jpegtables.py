"""Standard JPEG Huffman tables and marker-level helpers.

The tables are the "typical" luminance/chrominance tables from Annex K of
ITU-T T.81.  Motion-JPEG streams in the AVI1 flavour omit their DHT segment
and expect a decoder to assume exactly these.
"""

from __future__ import annotations

import struct
from collections.abc import Iterator

SOI = b"\xff\xd8"
EOI = b"\xff\xd9"
DHT = 0xC4
SOS = 0xDA

# (table class << 4 | table id, code-length counts, symbols)
_DC_LUMA_BITS = (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0)
_DC_CHROMA_BITS = (0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0)
_DC_VALUES = tuple(range(12))

_AC_LUMA_BITS = (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D)
_AC_LUMA_VALUES = bytes.fromhex(
"01020300041105122131410613516107"
"227114328191a1082342b1c11552d1f0"
"2433627282090a161718191a25262728"
"292a3435363738393a43444546474849"
"4a535455565758595a63646566676869"
"6a737475767778797a83848586878889"
"8a92939495969798999aa2a3a4a5a6a7"
"a8a9aab2b3b4b5b6b7b8b9bac2c3c4c5"
"c6c7c8c9cad2d3d4d5d6d7d8d9dae1e2"
"e3e4e5e6e7e8e9eaf1f2f3f4f5f6f7f8"
"f9fa"
)

_AC_CHROMA_BITS = (0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77)
_AC_CHROMA_VALUES = bytes.fromhex(
    "00010203110405213106124151076171"
    "1322328108144291a1b1c109233352f0"
    "156272d10a162434e125f11718191a26"
    "2728292a35363738393a434445464748"
    "494a535455565758595a636465666768"
    "696a737475767778797a828384858687"
    "88898a92939495969798999aa2a3a4a5"
    "a6a7a8a9aab2b3b4b5b6b7b8b9bac2c3"
    "c4c5c6c7c8c9cad2d3d4d5d6d7d8d9da"
    "e2e3e4e5e6e7e8e9eaf2f3f4f5f6f7f8"
    "f9fa"
)

STANDARD_TABLES: tuple[tuple[int, tuple[int, ...], bytes], ...] = (
    (0x00, _DC_LUMA_BITS, bytes(_DC_VALUES)),
    (0x10, _AC_LUMA_BITS, _AC_LUMA_VALUES),
    (0x01, _DC_CHROMA_BITS, bytes(_DC_VALUES)),
    (0x11, _AC_CHROMA_BITS, _AC_CHROMA_VALUES),
)


def _dht_segment() -> bytes:
    body = bytearray()
    for tc_th, bits, values in STANDARD_TABLES:
        assert sum(bits) == len(values)
        body.append(tc_th)
        body.extend(bits)
        body.extend(values)
    return b"\xff\xc4" + struct.pack(">H", len(body) + 2) + bytes(body)


STANDARD_DHT = _dht_segment()


def iter_segments(data: bytes) -> Iterator[tuple[int, int, int]]:
    """Yield ``(marker, start, end)`` for each header segment up to and including SOS.

    ``start`` points at the 0xFF of the marker, ``end`` one past the segment.
    Raises ``ValueError`` on malformed structure.
    """
    if data[:2] != SOI:
        raise ValueError("missing SOI")
    pos = 2
    n = len(data)
    while pos < n:
        if data[pos] != 0xFF:
            raise ValueError(f"expected marker at offset {pos}")
        # fill bytes
        while pos + 1 < n and data[pos + 1] == 0xFF:
            pos += 1
        if pos + 1 >= n:
            raise ValueError("truncated marker")
        marker = data[pos + 1]
        if marker == 0xD9 or 0xD0 <= marker <= 0xD7 or marker == 0x01:
            yield marker, pos, pos + 2
            pos += 2
            if marker == 0xD9:
                return
            continue
        if pos + 4 > n:
            raise ValueError("truncated segment length")
        (length,) = struct.unpack_from(">H", data, pos + 2)
        end = pos + 2 + length
        if length < 2 or end > n:
            raise ValueError(f"segment 0x{marker:02X} overruns buffer")
        yield marker, pos, end
        if marker == SOS:
            return
        pos = end
    raise ValueError("no SOS marker")


def has_dht(data: bytes) -> bool:
    return any(m == DHT for m, _, _ in iter_segments(data))


def insert_standard_dht(data: bytes) -> bytes:
    """Splice the standard tables in immediately before the SOS marker."""
    for marker, start, _ in iter_segments(data):
        if marker == SOS:
            return data[:start] + STANDARD_DHT + data[start:]
    raise ValueError("no SOS marker")


def strip_dht(data: bytes) -> bytes:
    """Drop every DHT segment, as AVI1 cameras do.  Used to build fixtures."""
    out = bytearray()
    last = 0
    for marker, start, end in iter_segments(data):
        if marker == DHT:
            out += data[last:start]
            last = end
    out += data[last:]
    return bytes(out)
