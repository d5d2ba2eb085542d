"""BBS-style group signature shared by all access points of a region.

A message vector m is committed as C = g1 + sum m_i*h_i and signed as
A = C / (x + e) for a fresh e.  Verification is e(A, e*g2 + GK) == e(C, g2).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from .group import (ORDER, G1Point, G2Point, decode_scalar, encode_scalar,
                    hash_to_g1, hash_to_scalar, pairings_equal, random_scalar)

SLAP_FIELDS = ("location-x", "location-y", "timestamp", "nym", "credential", "region")


@dataclass(frozen=True)
class GsParams:
    g1: G1Point
    g2: G2Point
    h: Tuple[G1Point, ...]

    @property
    def length(self) -> int:
        return len(self.h)


@dataclass(frozen=True)
class GsKeys:
    sk: int = field(repr=False)
    gk: G2Point


@dataclass(frozen=True)
class GroupSignature:
    A: G1Point
    e: int

    SIZE = 64

    def to_bytes(self) -> bytes:
        return self.A.to_bytes() + encode_scalar(self.e)

    @classmethod
    def from_bytes(cls, data: bytes) -> "GroupSignature":
        if len(data) != cls.SIZE:
            raise ValueError("group signature must be 64 bytes")
        return cls(G1Point.from_bytes(data[:32]), decode_scalar(data[32:]))


def gs_setup(length: int = len(SLAP_FIELDS), seed: bytes | int = 0) -> GsParams:
    if length < 1:
        raise ValueError("message length must be >= 1")
    seed_bytes = seed if isinstance(seed, bytes) else str(seed).encode()
    h = tuple(hash_to_g1(b"slap/gsig/basis", seed_bytes + i.to_bytes(2, "big")) for i in range(length))
    if len(set(h)) != length:
        raise RuntimeError("basis collision")
    return GsParams(G1Point.generator(), G2Point.generator(), h)


def gs_keygen(params: GsParams, rng: Optional[random.Random] = None) -> GsKeys:
    x = random_scalar(rng)
    return GsKeys(x, params.g2 * x)


def field_scalar(role: str, value: bytes | str | int) -> int:
    """Role-tagged hash of one signed field."""
    if isinstance(value, int):
        value = value.to_bytes(8, "big", signed=True)
    elif isinstance(value, str):
        value = value.encode("utf-8")
    return hash_to_scalar(b"slap/gsig/field/" + role.encode(), value)


def _commit(params: GsParams, messages: Sequence[int]) -> G1Point:
    if len(messages) > params.length:
        raise ValueError(f"{len(messages)} messages exceed length {params.length}")
    acc = params.g1
    for m, h in zip(messages, params.h):
        if m % ORDER:
            acc = acc + h * m
    return acc


def gs_sign(params: GsParams, keys: GsKeys, messages: Sequence[int],
            rng: Optional[random.Random] = None) -> GroupSignature:
    c = _commit(params, messages)
    while True:
        e = random_scalar(rng)
        if (keys.sk + e) % ORDER:
            break
    return GroupSignature(c * pow(keys.sk + e, -1, ORDER), e)


def gs_verify(params: GsParams, gk: G2Point, messages: Sequence[int], sig: GroupSignature) -> bool:
    if len(messages) > params.length or sig.A.is_identity():
        return False
    c = _commit(params, messages)
    return pairings_equal([(sig.A, params.g2 * sig.e + gk)], [(c, params.g2)])


def gs_batch_verify(params: GsParams, gk: G2Point,
                    items: Sequence[Tuple[Sequence[int], GroupSignature]],
                    rng: Optional[random.Random] = None) -> Tuple[bool, Optional[int]]:
    """Small-exponent batch check; on failure, falls back to locate the first bad item.

    Returns (True, None) or (False, index).
    """
    if not items:
        raise ValueError("empty batch")
    rng = rng or random.Random()
    if len(items) == 1:
        ok = gs_verify(params, gk, *items[0])
        return (True, None) if ok else (False, 0)
    lhs_g2 = None  # sum r_j (e_j A_j - C_j), paired with g2
    lhs_gk = None  # sum r_j A_j, paired with GK
    for j, (msgs, sig) in enumerate(items):
        if len(msgs) > params.length or sig.A.is_identity():
            return False, j
        r = rng.getrandbits(64) | 1
        term = sig.A * (r * sig.e % ORDER) - _commit(params, msgs) * r
        lhs_g2 = term if lhs_g2 is None else lhs_g2 + term
        ra = sig.A * r
        lhs_gk = ra if lhs_gk is None else lhs_gk + ra
    if pairings_equal([(lhs_g2, params.g2), (lhs_gk, gk)], []):
        return True, None
    for j, (msgs, sig) in enumerate(items):
        if not gs_verify(params, gk, msgs, sig):
            return False, j
    # the combination failed while every item passes: negligible, treat as accept
    return True, None
