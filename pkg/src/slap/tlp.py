"""RSA time-lock puzzle gating spectrum notifications and service requests.

The issuer publishes (n, e~) with e~ = 2^kappa + z, z = phi - (2^kappa mod phi) + e.
The solver cannot reduce the exponent without phi, so it computes
m^(2^kappa) with kappa sequential squarings and multiplies by m^z; the product
equals m^e, which the issuer checks with one exponentiation by d.
"""
from __future__ import annotations

import hashlib
import random
import threading
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import gmpy2

from . import wire
from .group import BigModulus, default_rng, rsa_modulus_gen

DEFAULT_PUBLIC_EXPONENT = 65537


class ModulusReuse(RuntimeError):
    """A second puzzle exponent was about to be published for one modulus."""


class PuzzleRegistry:
    """Tracks every published modulus; one e~ per n, ever."""

    def __init__(self):
        self._seen: Dict[int, int] = {}
        self._lock = threading.Lock()

    def register(self, n: int, e_tilde: int):
        with self._lock:
            if n in self._seen:
                raise ModulusReuse(f"modulus {hex(n)[:18]}... already carries a published exponent")
            self._seen[n] = e_tilde

    def __contains__(self, n: int) -> bool:
        return n in self._seen

    def __len__(self) -> int:
        return len(self._seen)


REGISTRY = PuzzleRegistry()


@dataclass(frozen=True)
class Puzzle:
    """Public puzzle in compact form (n, kappa, z)."""

    n: int
    kappa: int
    z: int

    @property
    def e_tilde(self) -> int:
        return (1 << self.kappa) + self.z

    @property
    def width(self) -> int:
        return (self.n.bit_length() + 7) // 8

    def to_bytes(self) -> bytes:
        return wire.pack([self.n.to_bytes(self.width, "big"), wire.u64(self.kappa),
                          self.z.to_bytes((self.z.bit_length() + 7) // 8 or 1, "big")])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Puzzle":
        n, k, z = wire.unpack_exact(data, 3)
        return cls(int.from_bytes(n, "big"), wire.from_u64(k), int.from_bytes(z, "big"))

    def digest(self) -> bytes:
        return hashlib.sha256(b"slap/tlp/puzzle" + self.to_bytes()).digest()


@dataclass(frozen=True)
class PuzzleKeys:
    puzzle: Puzzle
    d: int = field(repr=False)
    e: int
    modulus: BigModulus = field(repr=False)


@dataclass(frozen=True)
class PuzzleSolution:
    m: int
    c: int

    def to_bytes(self, width: int) -> bytes:
        return wire.pack([self.m.to_bytes(width, "big"), self.c.to_bytes(width, "big")])

    @classmethod
    def from_bytes(cls, data: bytes) -> "PuzzleSolution":
        m, c = wire.unpack_exact(data, 2)
        return cls(int.from_bytes(m, "big"), int.from_bytes(c, "big"))


@dataclass
class SquaringCounter:
    squarings: int = 0


def puzzle_from_modulus(modulus: BigModulus, kappa: int, e: Optional[int] = None,
                        d: Optional[int] = None, registry: Optional[PuzzleRegistry] = None,
                        require_disjoint: bool = False) -> PuzzleKeys:
    """Build a puzzle on a factored modulus from either e or d (default e = 65537)."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    phi = modulus.phi
    if phi is None:
        raise ValueError("puzzle generation needs the factorization")
    if require_disjoint and kappa <= phi.bit_length():
        raise ValueError(f"kappa={kappa} must exceed |phi(n)|={phi.bit_length()} bits in this profile")
    if d is not None:
        e = int(gmpy2.invert(d, phi))
    elif e is None:
        e = DEFAULT_PUBLIC_EXPONENT
    if gmpy2.gcd(e, phi) != 1:
        raise ValueError("exponent not invertible modulo phi(n)")
    d = int(gmpy2.invert(e, phi))
    r = int(gmpy2.powmod(2, kappa, phi))
    z = phi - r + e
    puzzle = Puzzle(modulus.n, kappa, z)
    (registry if registry is not None else REGISTRY).register(modulus.n, puzzle.e_tilde)
    return PuzzleKeys(puzzle, d, e, modulus)


def puzzle_gen(kappa: int, bits: int = 2048, rng: Optional[random.Random] = None,
               registry: Optional[PuzzleRegistry] = None, require_disjoint: bool = False) -> PuzzleKeys:
    modulus = rsa_modulus_gen(bits, rng or default_rng())
    return puzzle_from_modulus(modulus, kappa, registry=registry, require_disjoint=require_disjoint)


def message_element(payload: bytes, n: int) -> int:
    """Digest of the gated payload mapped into [1, n-1]."""
    width = (n.bit_length() + 7) // 8 + 16
    stream = hashlib.shake_256(b"slap/tlp/message" + payload).digest(width)
    return int.from_bytes(stream, "big") % (n - 1) + 1


def puzzle_solve(m: int, puzzle: Puzzle, counter: Optional[SquaringCounter] = None) -> PuzzleSolution:
    if not 0 < m < puzzle.n:
        raise ValueError("message out of range (0, n)")
    n = gmpy2.mpz(puzzle.n)
    x = gmpy2.mpz(m)
    for _ in range(puzzle.kappa):
        x = x * x % n
    if counter is not None:
        counter.squarings += puzzle.kappa
    c2 = gmpy2.powmod(m, puzzle.z, n)
    return PuzzleSolution(m, int(x * c2 % n))


def solution_verify(d: int, n: int, solution: PuzzleSolution) -> bool:
    if not (0 < solution.m < n and 0 <= solution.c < n):
        return False
    return int(gmpy2.powmod(solution.c, d, n)) == solution.m


def calibrate_rate(bits: int = 2048, probe: int = 10_000, rng: Optional[random.Random] = None) -> float:
    """Measured sequential squarings per second on this machine."""
    rng = rng or random.Random(0)
    n = gmpy2.mpz(rng.getrandbits(bits) | (1 << (bits - 1)) | 1)
    x = gmpy2.mpz(rng.getrandbits(bits - 1) | 2)
    start = time.perf_counter()
    for _ in range(probe):
        x = x * x % n
    return probe / max(time.perf_counter() - start, 1e-9)


# -- difficulty policy -------------------------------------------------------

THREAT_LEVELS = ("none", "low", "medium", "high")


@dataclass(frozen=True)
class DifficultyPolicy:
    """kappa = target delay (per threat level) x squaring rate (per device class)."""

    rates: Dict[str, float] = field(default_factory=lambda: {
        "iot": 1e5, "mobile": 5e5, "desktop": 2e6})
    targets: Dict[str, float] = field(default_factory=lambda: {
        "none": 0.0, "low": 0.1, "medium": 0.5, "high": 2.0})
    floor: int = 1

    def __post_init__(self):
        if self.floor < 1:
            raise ValueError("policy floor must be >= 1")
        ordered = [self.targets[t] for t in THREAT_LEVELS if t in self.targets]
        if ordered != sorted(ordered):
            raise ValueError("target delays must be non-decreasing in threat level")


def difficulty_for(device_class: str, threat_level: str,
                   policy: Optional[DifficultyPolicy] = None) -> int:
    policy = policy or DifficultyPolicy()
    if threat_level not in policy.targets:
        raise ValueError(f"unknown threat level {threat_level!r}")
    # an unknown class is priced like the fastest known one
    rate = policy.rates.get(device_class, max(policy.rates.values()))
    return max(policy.floor, round(policy.targets[threat_level] * rate))


class PuzzlePool:
    """Offline-generated puzzles keyed by kappa."""

    def __init__(self, bits: int = 2048, rng: Optional[random.Random] = None,
                 registry: Optional[PuzzleRegistry] = None, require_disjoint: bool = False):
        self.bits = bits
        self.rng = rng or default_rng()
        self.registry = registry if registry is not None else REGISTRY
        self.require_disjoint = require_disjoint
        self._pools: Dict[int, List[PuzzleKeys]] = {}
        self._lock = threading.Lock()

    def effective_kappa(self, kappa: int) -> int:
        # production profile keeps 2^kappa and z in disjoint bit ranges
        return max(kappa, self.bits + 1) if self.require_disjoint else kappa

    def pregenerate(self, kappa: int, count: int):
        kappa = self.effective_kappa(kappa)
        fresh = [puzzle_gen(kappa, self.bits, self.rng, self.registry, self.require_disjoint)
                 for _ in range(count)]
        with self._lock:
            self._pools.setdefault(kappa, []).extend(fresh)

    def take(self, kappa: int) -> PuzzleKeys:
        kappa = self.effective_kappa(kappa)
        with self._lock:
            pool = self._pools.get(kappa)
            if pool:
                return pool.pop()
        return puzzle_gen(kappa, self.bits, self.rng, self.registry, self.require_disjoint)

    def available(self, kappa: int) -> int:
        return len(self._pools.get(self.effective_kappa(kappa), ()))
