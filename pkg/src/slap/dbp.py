"""Public-key distance bounding.

Prover and verifier agree on a 2n-bit session key from a nonce-keyed
Diffie-Hellman over their long-term keys.  The verifier sends a random 2n-bit
pad m; both sides form a = ss XOR m.  In each of n timed rounds the verifier
sends a challenge bit c and expects a[2i + c] (0-indexed round i) back within
the round-trip budget of the distance threshold.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .group import G1Point

C_LIGHT = 299_792_458.0  # m/s

ADVERSARY_KINDS = ("guess", "pre_ask", "distance_fraud", "distance_hijack")

Bits = Tuple[int, ...]


class ChannelFailure(RuntimeError):
    pass


def propagation_ns(distance_m: float) -> float:
    return distance_m / C_LIGHT * 1e9


def round_trip_bound_ns(threshold_m: float, allowance_ns: float = 0.0) -> float:
    return 2.0 * threshold_m / C_LIGHT * 1e9 + allowance_ns


def to_bits(data: bytes, count: int) -> Bits:
    if count > 8 * len(data):
        raise ValueError("not enough bytes for the requested bit count")
    return tuple((data[i // 8] >> (7 - i % 8)) & 1 for i in range(count))


def xor_bits(a: Sequence[int], b: Sequence[int]) -> Bits:
    if len(a) != len(b):
        raise ValueError("bit strings differ in length")
    return tuple(x ^ y for x, y in zip(a, b))


def response_index(round_index, challenge):
    """Position in a of the response to `challenge` in 0-indexed round `round_index`.

    Works elementwise on numpy arrays as well.
    """
    return 2 * round_index + challenge


# -- key agreement -----------------------------------------------------------

def aka_derive(own_sk: int, own_pk: G1Point, peer_pk: G1Point, nonce: bytes, role: str,
               rounds: int) -> Bits:
    """2n-bit session key; both roles derive the same string."""
    if role not in ("prover", "verifier"):
        raise ValueError(f"unknown role {role!r}")
    if peer_pk.is_identity():
        raise ValueError("peer public key is the identity")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    shared = peer_pk * own_sk
    prover_pk, verifier_pk = (own_pk, peer_pk) if role == "prover" else (peer_pk, own_pk)
    nbytes = (2 * rounds + 7) // 8
    material = hashlib.shake_256(b"slap/dbp/kdf" + shared.to_bytes() + nonce
                                 + prover_pk.to_bytes() + verifier_pk.to_bytes()).digest(nbytes)
    return to_bits(material, 2 * rounds)


# -- responders --------------------------------------------------------------

class HonestProver:
    def __init__(self, session_key: Bits, processing_ns: float = 0.0):
        self.session_key = tuple(session_key)
        self.processing_ns = processing_ns
        self.table: Optional[Bits] = None

    def receive_pad(self, pad: Bits):
        self.table = xor_bits(self.session_key, pad)

    def respond(self, round_index: int, challenge: int) -> int:
        if self.table is None:
            raise ChannelFailure("challenge before pad")
        return self.table[response_index(round_index, challenge)]


class GuessingAdversary:
    """No key material; answers every round at random."""

    def __init__(self, rng: random.Random, processing_ns: float = 0.0):
        self.rng = rng
        self.processing_ns = processing_ns

    def receive_pad(self, pad: Bits):
        pass

    def respond(self, round_index: int, challenge: int) -> int:
        return self.rng.getrandbits(1)


class PreAskAdversary:
    """Mafia fraud: before the timed phase, query the real prover with guessed
    challenges; replay the answer when the guess was right, else guess."""

    def __init__(self, victim: HonestProver, rng: random.Random, processing_ns: float = 0.0):
        self.victim = victim
        self.rng = rng
        self.processing_ns = processing_ns
        self.guesses: List[int] = []
        self.answers: List[int] = []

    def receive_pad(self, pad: Bits):
        self.victim.receive_pad(pad)
        n = len(pad) // 2
        self.guesses = [self.rng.getrandbits(1) for _ in range(n)]
        self.answers = [self.victim.respond(i, g) for i, g in enumerate(self.guesses)]

    def respond(self, round_index: int, challenge: int) -> int:
        if self.guesses[round_index] == challenge:
            return self.answers[round_index]
        return self.rng.getrandbits(1)


class DistanceFraudProver(HonestProver):
    """Legitimate keys, answers with zero processing; physically too far away."""

    def __init__(self, session_key: Bits):
        super().__init__(session_key, processing_ns=0.0)


class HijackingAdversary(HonestProver):
    """A nearby party answering with its own session key instead of the victim's."""


def adversary_strategy(kind: str, rng: random.Random, *, session_key: Optional[Bits] = None,
                       victim: Optional[HonestProver] = None, processing_ns: float = 0.0):
    if kind == "guess":
        return GuessingAdversary(rng, processing_ns)
    if kind == "pre_ask":
        if victim is None:
            raise ValueError("pre_ask needs the victim prover")
        return PreAskAdversary(victim, rng, processing_ns)
    if kind == "distance_fraud":
        if session_key is None:
            raise ValueError("distance_fraud needs the prover's session key")
        return DistanceFraudProver(session_key)
    if kind == "distance_hijack":
        if session_key is None:
            raise ValueError("distance_hijack needs the hijacker's own session key")
        return HijackingAdversary(session_key, processing_ns)
    raise ValueError(f"unknown adversary kind {kind!r}; choose from {ADVERSARY_KINDS}")


# -- channels ----------------------------------------------------------------

class DirectChannel:
    """Point-to-point radio link at a fixed distance, timed from physics."""

    def __init__(self, responder, distance_m: float, jitter_ns: float = 0.0,
                 rng: Optional[random.Random] = None):
        self.responder = responder
        self.distance_m = distance_m
        self.jitter_ns = jitter_ns
        self.rng = rng or random.Random(0)

    def deliver_pad(self, pad: Bits):
        self.responder.receive_pad(pad)

    def exchange(self, round_index: int, challenge: int) -> Tuple[int, float]:
        bit = self.responder.respond(round_index, challenge)
        jitter = self.rng.uniform(0, self.jitter_ns) if self.jitter_ns else 0.0
        rtt = 2 * propagation_ns(self.distance_m) + self.responder.processing_ns + jitter
        return bit, rtt


# -- protocol run ------------------------------------------------------------

@dataclass
class RoundRecord:
    round: int
    challenge: int
    response: int
    timer_ns: float
    passed: bool


@dataclass
class DbpTranscript:
    rounds: int
    threshold_m: float
    bound_ns: float
    pad: Bits = ()
    records: List[RoundRecord] = field(default_factory=list)
    verdict: bool = False
    reason: str = ""

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in self.records)


@dataclass
class DbpVerifier:
    session_key: Bits
    threshold_m: float
    allowance_ns: float = 0.0

    @property
    def rounds(self) -> int:
        return len(self.session_key) // 2


def dbp_run(verifier: DbpVerifier, channel, rng: random.Random) -> Tuple[bool, DbpTranscript]:
    n = verifier.rounds
    bound = round_trip_bound_ns(verifier.threshold_m, verifier.allowance_ns)
    tr = DbpTranscript(n, verifier.threshold_m, bound)
    tr.pad = tuple(rng.getrandbits(1) for _ in range(2 * n))
    table = xor_bits(verifier.session_key, tr.pad)
    try:
        channel.deliver_pad(tr.pad)
        for i in range(n):
            c = rng.getrandbits(1)
            r, timer = channel.exchange(i, c)
            ok = timer <= bound and r == table[response_index(i, c)]
            tr.records.append(RoundRecord(i, c, r, timer, ok))
    except ChannelFailure as exc:
        tr.reason = f"channel failure: {exc}"
        return False, tr
    late = [r.round for r in tr.records if r.timer_ns > bound]
    wrong = [r.round for r in tr.records if r.response != table[response_index(r.round, r.challenge)]]
    if late:
        tr.reason = f"timing exceeded in rounds {late}"
    elif wrong:
        tr.reason = f"wrong response in rounds {wrong}"
    tr.verdict = not late and not wrong
    return tr.verdict, tr


# -- fraud statistics --------------------------------------------------------

def monte_carlo_success(kind: str, rounds: int, trials: int, seed: int = 0,
                        distance_m: float = 0.0, threshold_m: float = 10.0,
                        processing_ns: float = 0.0, allowance_ns: float = 0.0) -> float:
    """Vectorized acceptance rate of `kind` over independent sessions."""
    if kind not in ADVERSARY_KINDS:
        raise ValueError(f"unknown adversary kind {kind!r}")
    gen = np.random.default_rng(seed)
    table = gen.integers(0, 2, size=(trials, 2 * rounds), dtype=np.int8)
    challenges = gen.integers(0, 2, size=(trials, rounds), dtype=np.int8)
    idx = response_index(np.arange(rounds)[None, :], challenges)
    expected = np.take_along_axis(table, idx, axis=1)
    if kind == "guess":
        given = gen.integers(0, 2, size=(trials, rounds), dtype=np.int8)
    elif kind == "pre_ask":
        guesses = gen.integers(0, 2, size=(trials, rounds), dtype=np.int8)
        asked = np.take_along_axis(table, response_index(np.arange(rounds)[None, :], guesses), axis=1)
        coin = gen.integers(0, 2, size=(trials, rounds), dtype=np.int8)
        given = np.where(guesses == challenges, asked, coin)
    elif kind == "distance_fraud":
        given = expected
    else:
        own = gen.integers(0, 2, size=(trials, 2 * rounds), dtype=np.int8)
        given = np.take_along_axis(own, idx, axis=1)
    rtt = 2 * propagation_ns(distance_m) + processing_ns
    on_time = rtt <= round_trip_bound_ns(threshold_m, allowance_ns)
    if not on_time:
        return 0.0
    return float(np.mean(np.all(given == expected, axis=1)))


def pre_ask_exact(rounds: int) -> Fraction:
    """Exact pre-ask success by enumerating challenges, guesses, and coin flips.

    The response table is enumerated as well (every 2n-bit string), so the
    result is an average over all sessions rather than a formula.
    """
    total = Fraction(0)
    count = 0
    tables = list(product((0, 1), repeat=2 * rounds))
    for c in product((0, 1), repeat=rounds):
        for g in product((0, 1), repeat=rounds):
            for coins in product((0, 1), repeat=rounds):
                wins = 0
                for a in tables:
                    ok = True
                    for i in range(rounds):
                        correct = a[response_index(i, c[i])]
                        given = a[response_index(i, g[i])] if g[i] == c[i] else coins[i]
                        if given != correct:
                            ok = False
                            break
                    wins += ok
                total += Fraction(wins, len(tables))
                count += 1
    return total / count
