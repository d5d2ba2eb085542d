"""Set commitments with subset openings.

A set A = {a_1..a_k} of scalars is committed as C = (rho * f_A(s)) * P where
f_A(X) = prod (X - a_i) is the monic polynomial vanishing on A and s is the
setup trapdoor, known only through its powers s^i * P and s^i * P^.  A subset
D is opened with W = (rho * f_{A \\ D}(s)) * P and checked by
e(W, f_D(s) * P^) == e(C, P^).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from .group import (ORDER, G1Point, G2Point, hash_to_scalar, pairings_equal,
                    random_scalar)

MAX_CARDINALITY = 64

ROLES = ("device-id", "device-type", "location", "timestamp")


class SubsetViolation(ValueError):
    """Disclosed attributes are not a subset of the committed set."""


class OversizeSet(ValueError):
    pass


@dataclass(frozen=True)
class SetCommitParams:
    t: int
    g1_basis: Tuple[G1Point, ...]
    g2_basis: Tuple[G2Point, ...]
    # retained only when built with keep_trapdoor=True (tests)
    trapdoor: Optional[int] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class Attribute:
    role: str
    value: str

    @property
    def scalar(self) -> int:
        return hash_to_scalar(b"slap/attr/" + self.role.encode(), self.value.encode("utf-8"))


class AttributeSet:
    """Ordered attribute list; each attribute hashes to a scalar under its role tag."""

    def __init__(self, attributes: Iterable[Attribute] = ()):
        self.attributes: Tuple[Attribute, ...] = tuple(attributes)
        scalars = [a.scalar for a in self.attributes]
        if len(set(scalars)) != len(scalars):
            raise ValueError("duplicate attributes")
        self._scalars = tuple(scalars)

    @classmethod
    def of(cls, **pairs: str) -> "AttributeSet":
        return cls(Attribute(role.replace("_", "-"), str(v)) for role, v in pairs.items())

    @property
    def scalars(self) -> Tuple[int, ...]:
        return self._scalars

    def __len__(self):
        return len(self.attributes)

    def __iter__(self):
        return iter(self.attributes)

    def __contains__(self, attr):
        return attr in self.attributes

    def __eq__(self, other):
        return isinstance(other, AttributeSet) and set(self.attributes) == set(other.attributes)

    def __hash__(self):
        return hash(frozenset(self.attributes))

    def __repr__(self):
        return f"AttributeSet({list(self.attributes)!r})"

    def issubset(self, other: "AttributeSet") -> bool:
        return set(self.attributes) <= set(other.attributes)

    def minus(self, other: "AttributeSet") -> "AttributeSet":
        drop = set(other.attributes)
        return AttributeSet(a for a in self.attributes if a not in drop)

    def union(self, other: "AttributeSet") -> "AttributeSet":
        seen = set(self.attributes)
        return AttributeSet(list(self.attributes) + [a for a in other.attributes if a not in seen])

    def get(self, role: str) -> Optional[str]:
        for a in self.attributes:
            if a.role == role:
                return a.value
        return None


@dataclass(frozen=True)
class SetCommitment:
    point: G1Point

    def to_bytes(self) -> bytes:
        return self.point.to_bytes()


@dataclass(frozen=True)
class Opening:
    rho: int


def poly_from_roots(roots: Sequence[int]) -> List[int]:
    """Coefficients (low degree first) of prod (X - r) over Z_p."""
    coeffs = [1]
    for r in roots:
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i] = (nxt[i] - r * c) % ORDER
            nxt[i + 1] = (nxt[i + 1] + c) % ORDER
        coeffs = nxt
    return coeffs


def _eval_in_exponent(basis: Sequence, coeffs: Sequence[int]):
    if len(coeffs) > len(basis):
        raise OversizeSet(f"polynomial degree {len(coeffs) - 1} exceeds setup bound {len(basis) - 1}")
    acc = None
    for c, b in zip(coeffs, basis):
        if c == 0:
            continue
        term = b * c
        acc = term if acc is None else acc + term
    return acc if acc is not None else basis[0] * 0


def sc_setup(t: int, seed: bytes | int, keep_trapdoor: bool = False) -> SetCommitParams:
    """Powers-of-trapdoor basis (s^0 .. s^t) in both source groups.

    The trapdoor is drawn from `seed` and dropped unless ``keep_trapdoor``.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if t > MAX_CARDINALITY:
        raise ValueError(f"t exceeds ceiling {MAX_CARDINALITY}")
    seed_bytes = seed if isinstance(seed, bytes) else str(seed).encode()
    s = hash_to_scalar(b"slap/setcommit/trapdoor", seed_bytes) or 1
    g1, g2 = G1Point.generator(), G2Point.generator()
    g1_basis, g2_basis = [g1], [g2]
    power = 1
    for _ in range(t):
        power = power * s % ORDER
        g1_basis.append(g1 * power)
        g2_basis.append(g2 * power)
    return SetCommitParams(t, tuple(g1_basis), tuple(g2_basis), s if keep_trapdoor else None)


def _check_size(params: SetCommitParams, attrs: AttributeSet):
    if len(attrs) > params.t:
        raise OversizeSet(f"set of {len(attrs)} attributes exceeds bound t={params.t}")


def commit_with(params: SetCommitParams, attrs: AttributeSet, rho: int) -> SetCommitment:
    _check_size(params, attrs)
    base = _eval_in_exponent(params.g1_basis, poly_from_roots(attrs.scalars))
    return SetCommitment(base * rho)


def sc_commit(params: SetCommitParams, attrs: AttributeSet,
              rng: Optional[random.Random] = None) -> Tuple[SetCommitment, Opening]:
    rho = random_scalar(rng)
    return commit_with(params, attrs, rho), Opening(rho)


def sc_open(params: SetCommitParams, commitment: SetCommitment, attrs: AttributeSet,
            opening: Opening) -> bool:
    try:
        return commit_with(params, attrs, opening.rho) == commitment
    except OversizeSet:
        return False


@dataclass(frozen=True)
class SubsetWitness:
    point: G1Point

    def to_bytes(self) -> bytes:
        return self.point.to_bytes()


def sc_open_subset(params: SetCommitParams, attrs: AttributeSet, disclosed: AttributeSet,
                   opening: Opening) -> SubsetWitness:
    if not disclosed.issubset(attrs):
        raise SubsetViolation("disclosed attributes are not in the committed set")
    _check_size(params, attrs)
    rest = attrs.minus(disclosed)
    base = _eval_in_exponent(params.g1_basis, poly_from_roots(rest.scalars))
    return SubsetWitness(base * opening.rho)


def sc_verify_subset(params: SetCommitParams, commitment: SetCommitment,
                     disclosed: AttributeSet, witness: SubsetWitness) -> bool:
    if len(disclosed) > params.t or commitment.point.is_identity():
        return False
    if len(disclosed) == 0:
        # f_empty = 1, so the witness is the commitment itself
        return witness.point == commitment.point
    g2_part = _eval_in_exponent(params.g2_basis, poly_from_roots(disclosed.scalars))
    return pairings_equal([(witness.point, g2_part)], [(commitment.point, params.g2_basis[0])])
