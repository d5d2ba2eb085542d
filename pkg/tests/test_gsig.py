import random

import pytest
from hypothesis import given, strategies as st

from slap.group import ORDER, G1Point
from slap.gsig import (SLAP_FIELDS, GroupSignature, field_scalar, gs_batch_verify, gs_keygen,
                       gs_setup, gs_sign, gs_verify)

PARAMS = gs_setup(len(SLAP_FIELDS), b"test")
KEYS = gs_keygen(PARAMS, random.Random(1))
OTHER = gs_keygen(PARAMS, random.Random(2))
messages = st.lists(st.integers(0, ORDER - 1), min_size=len(SLAP_FIELDS), max_size=len(SLAP_FIELDS))


def test_completeness_thousand():
    rng = random.Random(3)
    for _ in range(1000):
        msgs = [rng.randrange(ORDER) for _ in SLAP_FIELDS]
        assert gs_verify(PARAMS, KEYS.gk, msgs, gs_sign(PARAMS, KEYS, msgs, rng))


@given(messages, st.integers(0, len(SLAP_FIELDS) - 1), st.integers(1, ORDER - 1))
def test_any_field_change_breaks_signature(msgs, index, delta):
    sig = gs_sign(PARAMS, KEYS, msgs, random.Random(index))
    tampered = list(msgs)
    tampered[index] = (tampered[index] + delta) % ORDER
    assert not gs_verify(PARAMS, KEYS.gk, tampered, sig)


@given(messages)
def test_other_group_key_rejects(msgs):
    sig = gs_sign(PARAMS, KEYS, msgs, random.Random(0))
    assert not gs_verify(PARAMS, OTHER.gk, msgs, sig)


def test_tampered_signature_components():
    msgs = list(range(len(SLAP_FIELDS)))
    sig = gs_sign(PARAMS, KEYS, msgs, random.Random(0))
    assert not gs_verify(PARAMS, KEYS.gk, msgs, GroupSignature(sig.A, (sig.e + 1) % ORDER))
    assert not gs_verify(PARAMS, KEYS.gk, msgs, GroupSignature(sig.A + G1Point.generator(), sig.e))
    assert not gs_verify(PARAMS, KEYS.gk, msgs, GroupSignature(G1Point.identity(), sig.e))
    assert GroupSignature.from_bytes(sig.to_bytes()) == sig
    assert len(sig.to_bytes()) == 64


def test_signatures_are_randomized():
    msgs = list(range(len(SLAP_FIELDS)))
    a, b = gs_sign(PARAMS, KEYS, msgs, random.Random(1)), gs_sign(PARAMS, KEYS, msgs, random.Random(2))
    assert a.to_bytes() != b.to_bytes()


def test_batch_verify_locates_bad_item():
    rng = random.Random(5)
    items = []
    for i in range(8):
        msgs = [rng.randrange(ORDER) for _ in SLAP_FIELDS]
        items.append((msgs, gs_sign(PARAMS, KEYS, msgs, rng)))
    assert gs_batch_verify(PARAMS, KEYS.gk, items, rng) == (True, None)
    bad = list(items)
    bad[5] = ([m + 1 for m in bad[5][0]], bad[5][1])
    assert gs_batch_verify(PARAMS, KEYS.gk, bad, rng) == (False, 5)
    with pytest.raises(ValueError):
        gs_batch_verify(PARAMS, KEYS.gk, [], rng)


def test_field_scalar_roles_separate():
    assert field_scalar("location-x", "1") != field_scalar("location-y", "1")
    assert field_scalar("region", b"r") == field_scalar("region", "r")
