import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import pair_response
from slap.dac import dac_keygen, dac_setup
from slap.dbp import (ChannelFailure, DbpVerifier, DirectChannel, HonestProver, PreAskAdversary,
                      adversary_strategy, aka_derive, dbp_run, monte_carlo_success, pre_ask_exact,
                      propagation_ns, response_index, round_trip_bound_ns, to_bits, xor_bits)

PARAMS, _ = dac_setup(100, 4, 2, b"dbp")


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_response_index_exhaustive(n):
    positions = set()
    for table in itertools.product((0, 1), repeat=2 * n):
        for i in range(n):
            for c in (0, 1):
                assert table[response_index(i, c)] == pair_response(table, i, c)
    for i in range(n):
        for c in (0, 1):
            positions.add(response_index(i, c))
    assert positions == set(range(2 * n))


def test_response_index_vectorized():
    i = np.arange(4)[None, :]
    c = np.array([[0, 1, 1, 0]])
    assert response_index(i, c).tolist() == [[0, 3, 5, 6]]


def test_pre_ask_exact_small():
    assert pre_ask_exact(1) == Fraction(3, 4)
    assert pre_ask_exact(4) == Fraction(81, 256)


def test_light_timing():
    assert math.isclose(propagation_ns(300.0), 1000.692, rel_tol=1e-6)
    assert math.isclose(round_trip_bound_ns(50.0), 2 * 50 / 299_792_458 * 1e9)
    assert round_trip_bound_ns(50.0, 10.0) == pytest.approx(round_trip_bound_ns(50.0) + 10.0)


def test_aka_symmetric_and_nonce_bound():
    rng = random.Random(1)
    p, v = dac_keygen(PARAMS, rng), dac_keygen(PARAMS, rng)
    a = aka_derive(p.sk, p.pk, v.pk, b"n1", "prover", 16)
    b = aka_derive(v.sk, v.pk, p.pk, b"n1", "verifier", 16)
    assert a == b and len(a) == 32
    assert aka_derive(p.sk, p.pk, v.pk, b"n2", "prover", 16) != a
    with pytest.raises(ValueError):
        aka_derive(p.sk, p.pk, v.pk, b"n", "witness", 16)


def key(n, seed=0):
    rng = random.Random(seed)
    return tuple(rng.getrandbits(1) for _ in range(2 * n))


@given(st.integers(1, 32), st.floats(0, 49.9), st.integers(0, 2**32))
def test_honest_within_threshold_accepted(n, distance, seed):
    k = key(n, seed)
    ok, tr = dbp_run(DbpVerifier(k, 50.0), DirectChannel(HonestProver(k), distance), random.Random(seed))
    assert ok and tr.verdict and len(tr.records) == n


@given(st.integers(1, 16), st.floats(50.5, 1000), st.integers(0, 2**32))
def test_distance_fraud_beyond_threshold_rejected(n, distance, seed):
    k = key(n, seed)
    prover = adversary_strategy("distance_fraud", random.Random(seed), session_key=k)
    ok, tr = dbp_run(DbpVerifier(k, 50.0), DirectChannel(prover, distance), random.Random(seed))
    assert not ok and "timing" in tr.reason


def test_wrong_key_rejected():
    ok, tr = dbp_run(DbpVerifier(key(16, 1), 50.0), DirectChannel(HonestProver(key(16, 2)), 1.0),
                     random.Random(0))
    assert not ok and "wrong response" in tr.reason


def test_challenge_before_pad_is_channel_failure():
    with pytest.raises(ChannelFailure):
        HonestProver(key(2)).respond(0, 1)


def test_transcript_jsonl():
    k = key(4)
    _, tr = dbp_run(DbpVerifier(k, 50.0), DirectChannel(HonestProver(k), 1.0), random.Random(0))
    assert tr.to_jsonl().count("\n") == 4


def test_pre_ask_object_matches_exact_rate():
    n, trials, wins = 4, 4000, 0
    for t in range(trials):
        rng = random.Random(t)
        k = key(n, t + 10_000)
        adv = PreAskAdversary(HonestProver(k), rng)
        wins += dbp_run(DbpVerifier(k, 50.0), DirectChannel(adv, 1.0), rng)[0]
    p = 81 / 256
    assert abs(wins / trials - p) <= 3 * math.sqrt(p * (1 - p) / trials)


@pytest.mark.parametrize("kind,expected", [("guess", 0.5 ** 4), ("pre_ask", 0.75 ** 4),
                                           ("distance_hijack", 0.5 ** 4)])
def test_monte_carlo_rates(kind, expected):
    rate = monte_carlo_success(kind, 4, 40_000, seed=3)
    assert abs(rate - expected) <= 3 * math.sqrt(expected * (1 - expected) / 40_000)


def test_monte_carlo_distance():
    assert monte_carlo_success("distance_fraud", 8, 100, distance_m=10.0, threshold_m=50.0) == 1.0
    assert monte_carlo_success("distance_fraud", 8, 100, distance_m=80.0, threshold_m=50.0) == 0.0
    with pytest.raises(ValueError):
        monte_carlo_success("teleport", 4, 10)


def test_bit_helpers():
    assert to_bits(b"\xa0", 4) == (1, 0, 1, 0)
    assert xor_bits((1, 0), (1, 1)) == (0, 1)
    with pytest.raises(ValueError):
        xor_bits((1,), (1, 0))
