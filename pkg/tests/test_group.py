import random

import pytest
from hypothesis import given, strategies as st

from slap.group import (G1_SIZE, G2_SIZE, GT_SIZE, ORDER, SCALAR_SIZE, BigModulus, EncodingError,
                        G1Point, G2Point, GTElement, decode_scalar, encode_scalar, group_setup,
                        hash_to_g1, hash_to_g2, hash_to_scalar, pairing, pairings_equal,
                        rsa_modulus_gen)

scalars = st.integers(1, ORDER - 1)


def test_encoding_sizes():
    g1, g2 = G1Point.generator(), G2Point.generator()
    assert (G1_SIZE, G2_SIZE, SCALAR_SIZE, GT_SIZE) == (32, 64, 32, 384)
    assert len(g1.to_bytes()) == 32 and len(g2.to_bytes()) == 64
    assert len(pairing(g1, g2).to_bytes()) == 384


@given(scalars)
def test_point_roundtrip(k):
    p, q = G1Point.generator() * k, G2Point.generator() * k
    assert G1Point.from_bytes(p.to_bytes()) == p
    assert G2Point.from_bytes(q.to_bytes()) == q


def test_identity_roundtrip():
    assert G1Point.from_bytes(G1Point.identity().to_bytes()).is_identity()
    assert G2Point.from_bytes(G2Point.identity().to_bytes()).is_identity()


@pytest.mark.parametrize("blob", [b"\x00" * 31, b"\xff" * 32, b"\x01" * 33])
def test_malformed_g1_rejected(blob):
    with pytest.raises(EncodingError):
        G1Point.from_bytes(blob)


def test_scalar_encoding_is_canonical():
    assert decode_scalar(encode_scalar(ORDER - 1)) == ORDER - 1
    with pytest.raises(EncodingError):
        decode_scalar(ORDER.to_bytes(32, "big"))


@given(scalars, scalars)
def test_bilinearity(a, b):
    g1, g2 = G1Point.generator(), G2Point.generator()
    assert pairing(g1 * a, g2 * b) == pairing(g1 * (a * b % ORDER), g2)
    assert pairings_equal([(g1 * a, g2 * b)], [(g1, g2 * (a * b % ORDER))])


def test_pairing_non_degenerate():
    assert not pairing(G1Point.generator(), G2Point.generator()).is_one()
    gt = pairing(G1Point.generator(), G2Point.generator())
    assert GTElement.from_bytes(gt.to_bytes()) == gt


def test_group_order():
    assert (G1Point.generator() * ORDER).is_identity()
    assert (G2Point.generator() * ORDER).is_identity()


def test_hashes_are_domain_separated_and_deterministic():
    assert hash_to_scalar(b"a", b"x") == hash_to_scalar(b"a", b"x")
    assert hash_to_scalar(b"a", b"x") != hash_to_scalar(b"b", b"x")
    assert hash_to_g1(b"a", b"x") != hash_to_g1(b"b", b"x")
    assert not hash_to_g2(b"a", b"x").is_identity()
    assert 0 <= hash_to_scalar(b"a", b"y") < ORDER


def test_group_setup_security_levels():
    assert group_setup(100).g1 == G1Point.generator()
    with pytest.raises(ValueError):
        group_setup(64)


def test_rsa_modulus():
    m = rsa_modulus_gen(256, random.Random(1))
    assert m.n.bit_length() == 256
    assert m.phi == (m.p - 1) * (m.q - 1)
    assert m.public().phi is None
    assert BigModulus.from_primes(11, 23).n == 253
