"""Set commitments, checked against a trapdoor oracle that works in the scalar field."""
import random

import pytest
from hypothesis import given, strategies as st

from oracles import poly_at, subsets
from slap.group import ORDER, G1Point
from slap.setcommit import (Attribute, AttributeSet, OversizeSet, SubsetViolation, SubsetWitness,
                            commit_with, poly_from_roots, sc_commit, sc_open, sc_open_subset,
                            sc_setup, sc_verify_subset)

UNIVERSE = [Attribute("k", str(i)) for i in range(5)]
PARAMS = sc_setup(6, b"test", keep_trapdoor=True)


def test_poly_from_roots_matches_pointwise_product():
    roots = [3, 5, 11]
    coeffs = poly_from_roots(roots)
    for x in (0, 1, 7, ORDER - 2):
        assert sum(c * pow(x, i, ORDER) for i, c in enumerate(coeffs)) % ORDER == poly_at(
            [type("A", (), {"scalar": r})() for r in roots], x)


def test_commitment_equals_oracle():
    s = PARAMS.trapdoor
    attrs = AttributeSet(UNIVERSE[:3])
    rho = 12345
    assert commit_with(PARAMS, attrs, rho).point == G1Point.generator() * (rho * poly_at(attrs, s) % ORDER)


def test_exhaustive_subset_soundness():
    """Every committed set A (|A| <= 4) against every claimed D in the universe."""
    rng = random.Random(0)
    for a_items in subsets(UNIVERSE[:4]):
        attrs = AttributeSet(a_items)
        commitment, opening = sc_commit(PARAMS, attrs, rng)
        honest = {}
        for d_items in subsets(UNIVERSE, 4):
            d = AttributeSet(d_items)
            if d.issubset(attrs):
                w = sc_open_subset(PARAMS, attrs, d, opening)
                assert sc_verify_subset(PARAMS, commitment, d, w), (a_items, d_items)
                honest[frozenset(d_items)] = w
            else:
                with pytest.raises(SubsetViolation):
                    sc_open_subset(PARAMS, attrs, d, opening)
        # an honest witness for one set never verifies for a different set
        for d_items in subsets(UNIVERSE, 4):
            d = AttributeSet(d_items)
            for key, w in honest.items():
                if key != frozenset(d_items):
                    assert not sc_verify_subset(PARAMS, commitment, d, w), (a_items, d_items, key)


def test_trapdoor_forgery_shows_why_it_must_be_dropped():
    # with s known, a witness for a non-member exists; verification is purely algebraic
    s = PARAMS.trapdoor
    attrs = AttributeSet(UNIVERSE[:2])
    commitment, opening = sc_commit(PARAMS, attrs, random.Random(1))
    outsider = AttributeSet([UNIVERSE[4]])
    scalar = opening.rho * poly_at(attrs, s) * pow(poly_at(outsider, s), -1, ORDER) % ORDER
    assert sc_verify_subset(PARAMS, commitment, outsider, SubsetWitness(G1Point.generator() * scalar))
    assert sc_setup(6, b"test").trapdoor is None


@given(st.sets(st.integers(0, 40), max_size=6), st.data())
def test_subset_completeness(values, data):
    attrs = AttributeSet(Attribute("v", str(v)) for v in sorted(values))
    disclosed = AttributeSet(data.draw(st.lists(st.sampled_from(list(attrs)), unique=True))
                             if len(attrs) else [])
    commitment, opening = sc_commit(PARAMS, attrs, random.Random(len(values)))
    assert sc_open(PARAMS, commitment, attrs, opening)
    assert sc_verify_subset(PARAMS, commitment, disclosed, sc_open_subset(PARAMS, attrs, disclosed, opening))


def test_open_rejects_other_set():
    attrs = AttributeSet(UNIVERSE[:2])
    commitment, opening = sc_commit(PARAMS, attrs)
    assert not sc_open(PARAMS, commitment, AttributeSet(UNIVERSE[1:3]), opening)


def test_oversize():
    big = AttributeSet(Attribute("v", str(i)) for i in range(7))
    with pytest.raises(OversizeSet):
        sc_commit(PARAMS, big)
    assert not sc_open(PARAMS, sc_commit(PARAMS, AttributeSet(UNIVERSE))[0], big, sc_commit(PARAMS, AttributeSet())[1])


def test_setup_bounds():
    with pytest.raises(ValueError):
        sc_setup(0, b"x")
    with pytest.raises(ValueError):
        sc_setup(65, b"x")


def test_duplicate_attributes_rejected():
    with pytest.raises(ValueError):
        AttributeSet([UNIVERSE[0], UNIVERSE[0]])
