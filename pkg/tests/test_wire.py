import pytest
from hypothesis import given, strategies as st

from slap import wire


@given(st.lists(st.binary(max_size=64), max_size=8))
def test_pack_roundtrip(fields):
    data = wire.pack(fields)
    assert wire.unpack(data) == fields
    assert len(wire.frame(7, fields)) == wire.framed_size(len(f) for f in fields)
    assert wire.unframe(wire.frame(7, fields)) == (7, fields)


@given(st.lists(st.binary(max_size=16), min_size=1, max_size=4), st.integers(1, 3))
def test_truncation_is_detected(fields, cut):
    data = wire.pack(fields)
    if cut > len(data):
        return
    with pytest.raises(wire.WireError):
        wire.unpack(data[:-cut])


def test_unpack_exact_count():
    with pytest.raises(wire.WireError):
        wire.unpack_exact(wire.pack([b"a", b"b"]), 3)


@given(st.integers(0, 2**64 - 1))
def test_u64(v):
    assert wire.from_u64(wire.u64(v)) == v
