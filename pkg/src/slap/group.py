"""Bilinear group and big-integer arithmetic with fixed-size canonical encodings.

The pairing groups come from the BN254 curve implemented by ``mclbn256``
(a ctypes binding to herumi's mcl).  Compressed encodings are 32 bytes for
G1, 64 bytes for G2 and 384 bytes for GT.  Scalars are plain Python ints
reduced modulo the group order and encode as 32-byte big-endian strings.
"""
from __future__ import annotations

import ctypes
import hashlib
import random
import secrets
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import gmpy2
import mclbn256
from mclbn256.mclbn256 import lib as _lib

ORDER = 0x2523648240000001BA344D8000000007FF9F800000000010A10000000000000D

G1_SIZE = 32
G2_SIZE = 64
GT_SIZE = 384
SCALAR_SIZE = 32

SUPPORTED_SECURITY = (100, 128)


class EncodingError(ValueError):
    """Bytes do not decode to a valid group element or scalar."""


def default_rng() -> random.Random:
    return secrets.SystemRandom()


def random_scalar(rng: Optional[random.Random] = None) -> int:
    """Uniform non-zero scalar."""
    rng = rng or default_rng()
    return rng.randrange(1, ORDER)


def _fr(k: int) -> mclbn256.Fr:
    fr = mclbn256.Fr(0)
    k %= ORDER
    if k:
        _lib.mclBnFr_setStr(fr.s, ctypes.c_char_p(k.to_bytes(32, "little")), 32, 32)
    return fr


class _Point:
    _backend: type
    _size: int
    _field: str
    _ser: object
    _deser: object
    _eq: object

    __slots__ = ("_p",)

    def __init__(self, raw):
        self._p = raw

    def __add__(self, other):
        return type(self)(self._p + other._p)

    def __sub__(self, other):
        return type(self)(self._p - other._p)

    def __neg__(self):
        return type(self)(-self._p)

    def __mul__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        return type(self)(self._p * _fr(k))

    __rmul__ = __mul__

    def __eq__(self, other):
        return type(other) is type(self) and self._p == other._p

    def __hash__(self):
        return hash(self.to_bytes())

    def is_identity(self) -> bool:
        return bool(self._p.zero())

    def to_bytes(self) -> bytes:
        buf = ctypes.create_string_buffer(self._size)
        n = type(self)._ser(buf, self._size, getattr(self._p, self._field))
        if n != self._size:
            raise EncodingError("serialization produced unexpected length")
        return buf.raw

    @classmethod
    def from_bytes(cls, data: bytes):
        if len(data) != cls._size:
            raise EncodingError(f"expected {cls._size} bytes, got {len(data)}")
        raw = cls._backend()
        n = cls._deser(getattr(raw, cls._field), data, len(data))
        if n != cls._size:
            raise EncodingError(f"bytes are not a valid {cls.__name__} encoding")
        if not raw.zero() and not raw.valid_order():
            raise EncodingError(f"{cls.__name__} point outside the prime-order subgroup")
        pt = cls(raw)
        # reject non-canonical encodings
        if pt.to_bytes() != bytes(data):
            raise EncodingError("non-canonical encoding")
        return pt

    def __repr__(self):
        return f"{type(self).__name__}({self.to_bytes().hex()[:16]}...)"


class G1Point(_Point):
    __slots__ = ()
    _backend = mclbn256.G1
    _size = G1_SIZE
    _field = "d"
    _ser = staticmethod(_lib.mclBnG1_serialize)
    _deser = staticmethod(_lib.mclBnG1_deserialize)

    @classmethod
    def generator(cls) -> "G1Point":
        return cls(mclbn256.G1.base_point())

    @classmethod
    def identity(cls) -> "G1Point":
        return cls.generator() * 0


class G2Point(_Point):
    __slots__ = ()
    _backend = mclbn256.G2
    _size = G2_SIZE
    _field = "d2"
    _ser = staticmethod(_lib.mclBnG2_serialize)
    _deser = staticmethod(_lib.mclBnG2_deserialize)

    @classmethod
    def generator(cls) -> "G2Point":
        return cls(mclbn256.G2.base_point())

    @classmethod
    def identity(cls) -> "G2Point":
        return cls.generator() * 0


class GTElement:
    """Element of the target group, written multiplicatively."""

    __slots__ = ("_e",)

    def __init__(self, raw):
        self._e = raw

    def __mul__(self, other: "GTElement") -> "GTElement":
        return GTElement(self._e * other._e)

    def __truediv__(self, other: "GTElement") -> "GTElement":
        return GTElement(self._e / other._e)

    def __pow__(self, k: int) -> "GTElement":
        return GTElement(self._e ** _fr(k))

    def __eq__(self, other):
        return isinstance(other, GTElement) and self._e == other._e

    def __hash__(self):
        return hash(self.to_bytes())

    def is_one(self) -> bool:
        return bool(_lib.mclBnGT_isOne(self._e.d12))

    def to_bytes(self) -> bytes:
        buf = ctypes.create_string_buffer(GT_SIZE)
        if _lib.mclBnGT_serialize(buf, GT_SIZE, self._e.d12) != GT_SIZE:
            raise EncodingError("GT serialization produced unexpected length")
        return buf.raw

    @classmethod
    def from_bytes(cls, data: bytes) -> "GTElement":
        if len(data) != GT_SIZE:
            raise EncodingError(f"expected {GT_SIZE} bytes, got {len(data)}")
        raw = mclbn256.GT()
        if _lib.mclBnGT_deserialize(raw.d12, data, len(data)) != GT_SIZE:
            raise EncodingError("bytes are not a valid GT encoding")
        return cls(raw)


def pairing(p: G1Point, q: G2Point) -> GTElement:
    return GTElement(p._p @ q._p)


def pairing_product(pairs: Sequence[Tuple[G1Point, G2Point]]) -> GTElement:
    """prod_i e(P_i, Q_i) with a single shared final exponentiation."""
    n = len(pairs)
    xs = (mclbn256.G1 * n)(*[p._p for p, _ in pairs])
    ys = (mclbn256.G2 * n)(*[q._p for _, q in pairs])
    ml = mclbn256.GT()
    _lib.mclBn_millerLoopVec(ml.d12, xs, ys, n)
    out = mclbn256.GT()
    _lib.mclBn_finalExp(out.d12, ml.d12)
    return GTElement(out)


def pairings_equal(lhs: Sequence[Tuple[G1Point, G2Point]],
                   rhs: Sequence[Tuple[G1Point, G2Point]]) -> bool:
    """Check prod e(lhs) == prod e(rhs) as one product against the identity."""
    pairs = list(lhs) + [(-p, q) for p, q in rhs]
    return pairing_product(pairs).is_one()


def encode_scalar(k: int) -> bytes:
    if not 0 <= k < ORDER:
        raise EncodingError("scalar out of range")
    return k.to_bytes(SCALAR_SIZE, "big")


def decode_scalar(data: bytes) -> int:
    if len(data) != SCALAR_SIZE:
        raise EncodingError(f"expected {SCALAR_SIZE} bytes, got {len(data)}")
    k = int.from_bytes(data, "big")
    if k >= ORDER:
        raise EncodingError("scalar not reduced modulo the group order")
    return k


def hash_to_scalar(domain_tag: bytes, msg: bytes) -> int:
    """Domain-separated hash into Z_p.

    Two SHA-256 blocks give 512 bits before reduction, so the bias is
    below 2^-250.
    """
    prefix = len(domain_tag).to_bytes(2, "big") + domain_tag
    wide = b"".join(hashlib.sha256(bytes([i]) + prefix + msg).digest() for i in (0, 1))
    return int.from_bytes(wide, "big") % ORDER


def hash_to_g1(domain_tag: bytes, msg: bytes) -> G1Point:
    digest = hashlib.sha256(len(domain_tag).to_bytes(2, "big") + domain_tag + msg).digest()
    raw = mclbn256.G1()
    if _lib.mclBnG1_hashAndMapTo(raw.d, ctypes.c_char_p(digest), len(digest)) != 0:
        raise RuntimeError("hash-to-curve failed")
    return G1Point(raw)


def hash_to_g2(domain_tag: bytes, msg: bytes) -> G2Point:
    digest = hashlib.sha256(len(domain_tag).to_bytes(2, "big") + domain_tag + msg).digest()
    raw = mclbn256.G2()
    if _lib.mclBnG2_hashAndMapTo(raw.d2, ctypes.c_char_p(digest), len(digest)) != 0:
        raise RuntimeError("hash-to-curve failed")
    return G2Point(raw)


@dataclass(frozen=True)
class GroupParams:
    order: int
    g1: G1Point
    g2: G2Point
    security_bits: int
    sizes: dict = field(default_factory=lambda: {
        "G1": G1_SIZE, "G2": G2_SIZE, "GT": GT_SIZE, "Zp": SCALAR_SIZE})

    def pair(self, p: G1Point, q: G2Point) -> GTElement:
        return pairing(p, q)


def group_setup(security_bits: int = 100) -> GroupParams:
    """Fixed BN254 parameters; the security level is recorded, not tuned."""
    if security_bits not in SUPPORTED_SECURITY:
        raise ValueError(f"unsupported security level {security_bits}; choose from {SUPPORTED_SECURITY}")
    return GroupParams(ORDER, G1Point.generator(), G2Point.generator(), security_bits)


# -- RSA moduli --------------------------------------------------------------

class PrimeGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class BigModulus:
    n: int
    p: Optional[int] = None
    q: Optional[int] = None

    @property
    def phi(self) -> Optional[int]:
        if self.p is None or self.q is None:
            return None
        return (self.p - 1) * (self.q - 1)

    @property
    def bits(self) -> int:
        return self.n.bit_length()

    @classmethod
    def from_primes(cls, p: int, q: int) -> "BigModulus":
        if p == q:
            raise ValueError("primes must be distinct")
        if not (gmpy2.is_prime(p) and gmpy2.is_prime(q)):
            raise ValueError("factors must be prime")
        return cls(p * q, p, q)

    def public(self) -> "BigModulus":
        return BigModulus(self.n)


def _random_prime(bits: int, rng: random.Random) -> int:
    candidate = rng.getrandbits(bits) | (3 << (bits - 2)) | 1
    return int(gmpy2.next_prime(candidate))


def rsa_modulus_gen(bits: int = 2048, rng: Optional[random.Random] = None,
                    max_tries: int = 16) -> BigModulus:
    """Two distinct random primes of bits/2 each with an exactly `bits`-bit product."""
    if bits < 64 or bits % 2:
        raise ValueError("modulus size must be an even number of bits >= 64")
    rng = rng or default_rng()
    half = bits // 2
    for _ in range(max_tries):
        p = _random_prime(half, rng)
        q = _random_prime(half, rng)
        if p != q and (p * q).bit_length() == bits and p.bit_length() == q.bit_length() == half:
            return BigModulus(p * q, p, q)
    raise PrimeGenerationError(f"no suitable {bits}-bit modulus after {max_tries} attempts")


def batch_scalars(rng: random.Random, count: int, bits: int = 64) -> Iterable[int]:
    """Short random exponents for small-exponent batch verification."""
    return [rng.getrandbits(bits) | 1 for _ in range(count)]
