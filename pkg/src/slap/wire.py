"""Length-prefixed field sequences.

A message is a 1-byte type tag followed by fields, each a 4-byte big-endian
length and the raw bytes.  Nested structures are fields holding their own
field sequences (without a tag).
"""
from __future__ import annotations

import struct
from typing import Iterable, List, Sequence, Tuple

_LEN = struct.Struct(">I")


class WireError(ValueError):
    pass


def pack(fields: Iterable[bytes]) -> bytes:
    out = bytearray()
    for f in fields:
        out += _LEN.pack(len(f))
        out += f
    return bytes(out)


def unpack(data: bytes) -> List[bytes]:
    fields, i = [], 0
    while i < len(data):
        if i + 4 > len(data):
            raise WireError("truncated length prefix")
        (n,) = _LEN.unpack_from(data, i)
        i += 4
        if i + n > len(data):
            raise WireError("truncated field")
        fields.append(bytes(data[i:i + n]))
        i += n
    return fields


def unpack_exact(data: bytes, count: int) -> List[bytes]:
    fields = unpack(data)
    if len(fields) != count:
        raise WireError(f"expected {count} fields, got {len(fields)}")
    return fields


def frame(tag: int, fields: Sequence[bytes]) -> bytes:
    return bytes([tag]) + pack(fields)


def unframe(data: bytes) -> Tuple[int, List[bytes]]:
    if not data:
        raise WireError("empty message")
    return data[0], unpack(data[1:])


def framed_size(field_sizes: Iterable[int]) -> int:
    """Size of a framed message computed from field sizes alone."""
    return 1 + sum(4 + n for n in field_sizes)


def u64(v: int) -> bytes:
    return v.to_bytes(8, "big")


def from_u64(b: bytes) -> int:
    if len(b) != 8:
        raise WireError("expected 8-byte integer")
    return int.from_bytes(b, "big")
