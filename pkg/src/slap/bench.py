"""Wall-clock benchmarks for phases and primitives.

Reference figures below were measured on a different machine and are
printed only for side-by-side reading; nothing here is expected to match them.
"""
from __future__ import annotations

import random
import statistics
import time
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .dac import cred_prove, cred_verify, nym_gen
from .dbp import aka_derive
from .group import random_scalar, rsa_modulus_gen
from .gsig import SLAP_FIELDS, gs_batch_verify, gs_keygen, gs_setup, gs_sign, gs_verify
from .protocol import PROFILES
from .report import median_iqr
from .scenario import World, build_world, load_scenario
from .setcommit import Attribute, AttributeSet, sc_commit, sc_open_subset, sc_verify_subset
from .tlp import (PuzzleRegistry, SquaringCounter, message_element, puzzle_from_modulus,
                  puzzle_solve, solution_verify)

PHASES = ("pol_ap", "pol_nd", "query", "notify", "primitives")
MIN_REPS = 10
KAPPA_LADDER = (1_000, 15_000, 50_000, 100_000)

# milliseconds on the reference machine
REFERENCE_MS: Dict[str, float] = {
    "pol_ap/client": 20.17, "pol_ap/ap": 61.26,
    "pol_nd/client": 31.75, "pol_nd/nd": 78.05,
    "query/client": 17.22, "query/server": 61.39,
    "notify/client": 17.22, "notify/server": 59.01,
    "gs_sign": 2.26, "gs_verify": 3.17, "tlp_verify": 0.797, "aka_derive": 0.612,
}
REFERENCE_LADDER_MS = {1_000: 3.9, 15_000: 56.31, 50_000: 194.0, 100_000: 784.0}


def _timed(fn: Callable[[], object], reps: int) -> List[float]:
    out = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return out


def _row(name: str, samples: Sequence[float], reference: Optional[float] = None) -> dict:
    stats = median_iqr([s * 1e3 for s in samples])
    return {"operation": name, "median_ms": stats["median"], "q1_ms": stats["q1"], "q3_ms": stats["q3"],
            "reps": stats["n"], "reference_ms": reference}


# -- primitives ------------------------------------------------------------------

def bench_primitives(reps: int = MIN_REPS, seed: int = 0, profile: str = "toy") -> List[dict]:
    rng = random.Random(seed)
    world = _world("attack_world", seed, profile)
    su, pub = world.clients["su-1"], world.fcc.public
    rows = []

    gs = gs_setup(len(SLAP_FIELDS), b"bench")
    gkeys = gs_keygen(gs, rng)
    msgs = [random_scalar(rng) for _ in SLAP_FIELDS]
    sig = gs_sign(gs, gkeys, msgs, rng)
    rows.append(_row("gs_sign", _timed(lambda: gs_sign(gs, gkeys, msgs, rng), reps), REFERENCE_MS["gs_sign"]))
    rows.append(_row("gs_verify", _timed(lambda: gs_verify(gs, gkeys.gk, msgs, sig), reps),
                     REFERENCE_MS["gs_verify"]))
    batch = [(msgs, sig)] * 16
    per_item = [t / len(batch) for t in _timed(lambda: gs_batch_verify(gs, gkeys.gk, batch, rng), reps)]
    rows.append(_row("gs_batch_verify (per item, batch of 16)", per_item))

    disclosure = su.own_disclosure(su.cred)
    pres = cred_prove(pub.dac, su.keys, su.cred, disclosure, b"bench", rng)
    rows.append(_row("cred_prove", _timed(lambda: cred_prove(pub.dac, su.keys, su.cred, disclosure, b"bench", rng),
                                          reps)))
    rows.append(_row("cred_verify", _timed(lambda: cred_verify(pub.dac, pub.root_pk, pres, b"bench"), reps)))
    rows.append(_row("nym_gen", _timed(lambda: nym_gen(pub.dac, su.keys, rng), reps)))

    attrs = AttributeSet([Attribute(f"a{i}", str(i)) for i in range(8)])
    sub = AttributeSet(list(attrs)[:3])
    sc = pub.dac.sc
    commitment, opening = sc_commit(sc, attrs, rng)
    witness = sc_open_subset(sc, attrs, sub, opening)
    rows.append(_row("sc_commit (8 attributes)", _timed(lambda: sc_commit(sc, attrs, rng), reps)))
    rows.append(_row("sc_open_subset (3 of 8)", _timed(lambda: sc_open_subset(sc, attrs, sub, opening), reps)))
    rows.append(_row("sc_verify_subset (3 of 8)",
                     _timed(lambda: sc_verify_subset(sc, commitment, sub, witness), reps)))

    nd = nym_gen(pub.dac, su.keys, rng)
    rows.append(_row("aka_derive", _timed(
        lambda: aka_derive(su.keys.sk, su.keys.pk, nd.nym, b"n" * 32, "prover", 32), reps),
        REFERENCE_MS["aka_derive"]))

    bits = PROFILES[profile].rsa_bits
    keys = puzzle_from_modulus(rsa_modulus_gen(bits, rng), 1_000, registry=PuzzleRegistry())
    sol = puzzle_solve(message_element(b"bench", keys.puzzle.n), keys.puzzle)
    rows.append(_row(f"tlp_verify ({bits}-bit)", _timed(lambda: solution_verify(keys.d, keys.puzzle.n, sol), reps),
                     REFERENCE_MS["tlp_verify"]))
    return rows


# -- time-lock ladder ----------------------------------------------------------

def tlp_ladder(ladder: Sequence[int] = KAPPA_LADDER, reps: int = MIN_REPS, bits: int = 2048,
               seed: int = 0, verify_per_rep: int = 5) -> dict:
    """Solve and verify times per kappa, with a least-squares line through the solve medians.

    Repetitions are interleaved across the ladder so slow drift in machine
    load lands on every kappa alike instead of on whichever ran last.
    """
    rng = random.Random(seed)
    setups = []
    for kappa in ladder:
        keys = puzzle_from_modulus(rsa_modulus_gen(bits, rng), kappa, registry=PuzzleRegistry())
        m = message_element(f"ladder/{kappa}".encode(), keys.puzzle.n)
        setups.append((kappa, keys, m, SquaringCounter(), [], []))
    for _ in range(reps):
        for kappa, keys, m, counter, solve_samples, verify_samples in setups:
            t0 = time.perf_counter()
            solution = puzzle_solve(m, keys.puzzle, counter)
            solve_samples.append(time.perf_counter() - t0)
            if not solution_verify(keys.d, keys.puzzle.n, solution):
                raise AssertionError(f"ladder puzzle at kappa={kappa} failed to verify")
            verify_samples.extend(_timed(lambda: solution_verify(keys.d, keys.puzzle.n, solution),
                                         verify_per_rep))
    rows = [{"kappa": kappa, "squarings_per_solve": counter.squarings // reps,
             "solve_median_ms": statistics.median(solves) * 1e3,
             "verify_median_ms": statistics.median(verifies) * 1e3,
             "reference_solve_ms": REFERENCE_LADDER_MS.get(kappa)}
            for kappa, _, _, counter, solves, verifies in setups]
    x = np.array([r["kappa"] for r in rows], dtype=float)
    y = np.array([r["solve_median_ms"] for r in rows])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(residual ** 2)) / total if total else 1.0
    verify = [r["verify_median_ms"] for r in rows]
    return {"bits": bits, "reps": reps, "rows": rows, "slope_ms_per_squaring": float(slope),
            "intercept_ms": float(intercept), "r_squared": r2,
            "verify_ratio": max(verify) / min(verify)}


# -- protocol phases -------------------------------------------------------------

def _world(name: str, seed: int, profile: str) -> World:
    world = build_world(load_scenario(name), seed, profile)
    for user in list(world.clients.values()) + list(world.nds.values()):
        user.register()
    return world


def _handler_seconds(entities) -> float:
    return sum(sum(e.crypto_seconds.values()) for e in entities)


def _phase_samples(peers, setup: Callable[[], object],
                   action: Callable[[object], object], reps: int):
    total, peer = [], []
    for _ in range(reps):
        ctx = setup()
        before_peer = _handler_seconds(peers)
        t0 = time.perf_counter()
        action(ctx)
        elapsed = time.perf_counter() - t0
        spent_peer = _handler_seconds(peers) - before_peer
        total.append(elapsed - spent_peer)
        peer.append(spent_peer)
    return total, peer


def bench_phase(phase: str, reps: int = MIN_REPS, seed: int = 0, profile: str = "toy") -> List[dict]:
    if phase == "primitives":
        return bench_primitives(reps, seed, profile)
    if phase not in PHASES:
        raise ValueError(f"unknown phase {phase!r}; choose from {', '.join(PHASES)}")
    if phase == "pol_nd":
        world = _world("rural_nd_query", seed, profile)
        su = world.clients["su-1"]
        client, peer = _phase_samples([world.nds["nd-1"]], lambda: None,
                                      lambda _: su.pol_nd("nd-1"), reps)
        return [_row("pol_nd/client", client, REFERENCE_MS["pol_nd/client"]),
                _row("pol_nd/nd", peer, REFERENCE_MS["pol_nd/nd"])]
    world = _world("attack_world", seed, profile)
    su = world.clients["su-1"]
    ap, psd = world.aps["ap-1"], world.servers["psd-1"]
    if phase == "pol_ap":
        client, peer = _phase_samples([ap], lambda: None, lambda _: su.pol_ap("ap-1"), reps)
        return [_row("pol_ap/client", client, REFERENCE_MS["pol_ap/client"]),
                _row("pol_ap/ap", peer, REFERENCE_MS["pol_ap/ap"])]
    if phase == "query":
        client, peer = _phase_samples([psd], lambda: su.pol_ap("ap-1"),
                                      lambda held: su.query("psd-1", 3555, phi=held[0], pseudonym=held[1]),
                                      reps)
        return [_row("query/client", client, REFERENCE_MS["query/client"]),
                _row("query/server", peer, REFERENCE_MS["query/server"])]

    def fresh_grant():
        phi, nym = su.pol_ap("ap-1")
        return su.query("psd-1", 3555, phi=phi, pseudonym=nym)

    client, peer = _phase_samples([psd], fresh_grant,
                                  lambda grant: su.notify(grant, b"Ubench"), reps)
    kappa = fresh_grant().puzzle.kappa
    return [_row(f"notify/client (kappa={kappa}, includes solve)", client, REFERENCE_MS["notify/client"]),
            _row("notify/server", peer, REFERENCE_MS["notify/server"])]
