import random

import pytest
from hypothesis import given, strategies as st

from slap.dac import (BOTTOM, Credential, DelegationBoundExceeded, DelegationDepthExceeded,
                      IssuanceRefused, Presentation, RootIssuer, Signature, cred_prove, cred_verify,
                      create_cred, dac_keygen, dac_setup, delegate, nym_gen, verify_signature)
from slap.setcommit import Attribute, AttributeSet, SubsetViolation

PARAMS, ROOT = dac_setup(100, 6, 2, b"test")
ISSUER = RootIssuer(PARAMS, ROOT, random.Random(0))
ATTRS = AttributeSet([Attribute("device-id", "d1"), Attribute("device-type", "SU"),
                      Attribute("device-class", "mobile")])


def fresh(seed, bound=2, attrs=ATTRS):
    rng = random.Random(seed)
    keys = dac_keygen(PARAMS, rng)
    return keys, create_cred(ISSUER, keys, attrs, bound, rng)


KEYS, CRED = fresh(1)


def test_core_is_224_bytes():
    core = CRED.core_bytes(KEYS)
    assert len(core) == 224 == 160 + 32 + 32


def test_credential_serialization_roundtrip():
    assert Credential.from_bytes(CRED.to_bytes()) == CRED
    assert Signature.from_bytes(CRED.sig.to_bytes()) == CRED.sig


def test_signature_verifies_on_holder_key():
    assert verify_signature(PARAMS, ROOT.pk, CRED.holder, CRED.commitments, CRED.sig)


@given(st.lists(st.sampled_from(list(ATTRS)), unique=True), st.binary(max_size=16))
def test_presentation_completeness(disclosed, context):
    pres = cred_prove(PARAMS, KEYS, CRED, (AttributeSet(disclosed),), context, random.Random(len(context)))
    assert cred_verify(PARAMS, ROOT.pk, pres, context)
    assert cred_verify(PARAMS, ROOT.pk, Presentation.from_bytes(pres.to_bytes()), context)


def test_presentation_bound_to_context():
    pres = cred_prove(PARAMS, KEYS, CRED, None, b"ctx-a", random.Random(0))
    assert not cred_verify(PARAMS, ROOT.pk, pres, b"ctx-b")


def test_undisclosed_attribute_cannot_be_claimed():
    with pytest.raises(SubsetViolation):
        cred_prove(PARAMS, KEYS, CRED, (AttributeSet([Attribute("device-type", "PU")]),), b"", random.Random(0))


def test_forged_disclosure_rejected():
    pres = cred_prove(PARAMS, KEYS, CRED, (AttributeSet([Attribute("device-type", "SU")]),), b"", random.Random(0))
    from dataclasses import replace
    forged = replace(pres, disclosed=(AttributeSet([Attribute("device-type", "PU")]),))
    assert not cred_verify(PARAMS, ROOT.pk, forged, b"")


def test_other_root_key_rejects():
    _, other_root = dac_setup(100, 6, 2, b"other")
    pres = cred_prove(PARAMS, KEYS, CRED, None, b"", random.Random(0))
    assert not cred_verify(PARAMS, other_root.pk, pres, b"")


def test_wrong_keys_cannot_prove():
    other, _ = fresh(2)
    with pytest.raises(ValueError):
        cred_prove(PARAMS, other, CRED, None, b"")


def test_pseudonyms_fresh_and_zero_aux_test_only():
    a, b = nym_gen(PARAMS, KEYS, random.Random(1)), nym_gen(PARAMS, KEYS, random.Random(2))
    assert a.nym != b.nym
    with pytest.raises(ValueError):
        nym_gen(PARAMS, KEYS, aux=0)
    assert nym_gen(PARAMS, KEYS, aux=0, test_mode=True).nym == KEYS.pk


def test_delegation_chain_and_bottom():
    rng = random.Random(7)
    keys_b = dac_keygen(PARAMS, rng)
    extra = AttributeSet([Attribute("location", "1,2"), Attribute("timestamp", "5")])
    got = delegate(PARAMS, ROOT.pk, CRED, KEYS, keys_b, extra, BOTTOM, rng)
    assert got.depth == 2 and got.bound == BOTTOM and got.update_keys == ()
    pres = cred_prove(PARAMS, keys_b, got, (AttributeSet(), extra), b"x", rng)
    assert cred_verify(PARAMS, ROOT.pk, pres, b"x")
    keys_c = dac_keygen(PARAMS, rng)
    with pytest.raises((DelegationBoundExceeded, DelegationDepthExceeded)):
        delegate(PARAMS, ROOT.pk, got, keys_b, keys_c, extra, BOTTOM, rng)


def test_delegation_refused_without_update_keys():
    keys_a, cred_a = fresh(9, bound=BOTTOM)
    rng = random.Random(9)
    with pytest.raises(DelegationBoundExceeded):
        delegate(PARAMS, ROOT.pk, cred_a, keys_a, dac_keygen(PARAMS, rng), ATTRS, BOTTOM, rng)


def test_delegatee_cannot_claim_delegator_key():
    rng = random.Random(11)
    keys_b = dac_keygen(PARAMS, rng)
    got = delegate(PARAMS, ROOT.pk, CRED, KEYS, keys_b, AttributeSet([Attribute("location", "x")]), BOTTOM, rng)
    assert got.holder == keys_b.pk != KEYS.pk


def test_unlinkability_no_repeated_elements():
    rng = random.Random(13)
    seen = set()
    for _ in range(50):
        pres = cred_prove(PARAMS, KEYS, CRED, None, b"", rng)
        for elem in pres.group_elements():
            assert elem not in seen
            seen.add(elem)


def test_issuance_refuses_bad_proof():
    from slap.dac import issuance_request
    rng = random.Random(17)
    keys = dac_keygen(PARAMS, rng)
    sid, nonce = ISSUER.open_session()
    req = issuance_request(PARAMS, keys, nym_gen(PARAMS, keys, rng), b"wrong-nonce" + bytes(21), rng)
    with pytest.raises(IssuanceRefused):
        ISSUER.issue(sid, req, ATTRS, 2)


def test_setup_bounds():
    with pytest.raises(ValueError):
        dac_setup(100, 6, 1, b"x")
    with pytest.raises(ValueError):
        dac_setup(100, 6, 9, b"x")


@pytest.mark.parametrize("eta", [2, 3])
def test_delegation_bound_never_increases(eta):
    """Every chain from every root bound with every requested bound, for eta = 2 and 3."""
    params, root = dac_setup(100, 6, eta, b"chain")
    issuer = RootIssuer(params, root, random.Random(eta))
    level = AttributeSet([Attribute("hop", "x")])
    rng = random.Random(100 + eta)

    def walk(cred, keys, depth):
        for requested in range(eta + 1):
            nxt = dac_keygen(params, rng)
            can = depth < eta and cred.bound > depth and requested <= cred.bound
            try:
                got = delegate(params, root.pk, cred, keys, nxt, level, requested, rng)
            except (DelegationBoundExceeded, DelegationDepthExceeded):
                assert not can, (depth, cred.bound, requested)
                continue
            assert can, (depth, cred.bound, requested)
            assert got.bound <= cred.bound and got.depth == depth + 1
            assert cred_verify(params, root.pk, cred_prove(params, nxt, got, None, b"", rng), b"")
            walk(got, nxt, depth + 1)

    for root_bound in range(eta + 1):
        keys = dac_keygen(params, rng)
        walk(create_cred(issuer, keys, ATTRS, root_bound, rng), keys, 1)
