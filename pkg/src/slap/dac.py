"""Delegatable attribute-based anonymous credentials.

Credentials are equivalence-class signatures on the vector
(K, C_1, ..., C_k) where K is the holder's public key and C_i is a set
commitment to the attributes certified at delegation level i.  The signature
is sigma = (Z, Y, Y^, T):

    Z  = y * (x0*K + sum_i x_i*C_i)     Y = P/y    Y^ = P^/y    T = y*x0*P

and verifies with

    e(Z, Y^) = e(K, X0^) * prod_i e(C_i, Xi^)
    e(Y, P^) = e(P, Y^)
    e(T, Y^) = e(P, X0^)

Scaling every message component by mu and re-randomizing y by psi maps a
signature to a fresh-looking one on the same class; with mu = aux the first
component becomes the pseudonym aux*pk.  T lets a holder who knows the
discrete log of K strip the key from Z (Z - s*T) so a delegator can hand
the signature to a delegatee, who binds its own key by adding s'*T.  An
update key for level j is (y*x_j*s^i*P)_i, enough to add a commitment at
level j without the issuer; the delegation bound decides how many such keys
a holder receives.
"""
from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from . import wire
from .group import (ORDER, G1Point, G2Point, GroupParams, decode_scalar,
                    encode_scalar, group_setup, hash_to_scalar, pairings_equal,
                    random_scalar)
from .setcommit import (Attribute, AttributeSet, OversizeSet, SetCommitParams,
                        SubsetViolation, SubsetWitness, _eval_in_exponent,
                        commit_with, poly_from_roots, sc_open_subset, sc_setup,
                        sc_verify_subset)

BOTTOM = 0  # delegation disabled
MAX_DEPTH = 8


class IssuanceRefused(Exception):
    pass


class DelegationError(Exception):
    pass


class DelegationDepthExceeded(DelegationError):
    pass


class DelegationBoundExceeded(DelegationError):
    pass


@dataclass(frozen=True)
class DacParams:
    group: GroupParams
    sc: SetCommitParams
    eta: int


@dataclass(frozen=True)
class RootPublicKey:
    binding: G2Point
    levels: Tuple[G2Point, ...]

    def to_bytes(self) -> bytes:
        return wire.pack([self.binding.to_bytes()] + [x.to_bytes() for x in self.levels])


@dataclass(frozen=True)
class RootKeys:
    binding_sk: int
    sk: Tuple[int, ...]
    pk: RootPublicKey


@dataclass(frozen=True)
class UserKeys:
    sk: int
    pk: G1Point


@dataclass(frozen=True)
class Pseudonym:
    nym: G1Point
    aux: int = field(repr=False)


@dataclass(frozen=True)
class Signature:
    Z: G1Point
    Y: G1Point
    Y_hat: G2Point
    T: G1Point

    def to_bytes(self) -> bytes:
        return self.Z.to_bytes() + self.Y.to_bytes() + self.T.to_bytes() + self.Y_hat.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signature":
        if len(data) != 160:
            raise wire.WireError("signature must be 160 bytes")
        return cls(G1Point.from_bytes(data[:32]), G1Point.from_bytes(data[32:64]),
                   G2Point.from_bytes(data[96:160]), G1Point.from_bytes(data[64:96]))

    def change_rep(self, mu: int, psi: int) -> "Signature":
        psi_inv = pow(psi, -1, ORDER)
        return Signature(self.Z * (psi * mu % ORDER), self.Y * psi_inv,
                         self.Y_hat * psi_inv, self.T * psi)


UpdateKey = Tuple[G1Point, ...]


@dataclass(frozen=True)
class Credential:
    """Holder-side credential in the representation whose key component is the holder's pk."""

    sig: Signature
    holder: G1Point
    commitments: Tuple[G1Point, ...]
    openings: Tuple[int, ...]
    attributes: Tuple[AttributeSet, ...]
    update_keys: Tuple[UpdateKey, ...] = ()
    bound: int = BOTTOM

    @property
    def depth(self) -> int:
        return len(self.commitments)

    def core_bytes(self, keys: UserKeys) -> bytes:
        """sigma || pk || sk: the constant-size part of a held credential (224 bytes)."""
        if keys.pk != self.holder:
            raise ValueError("keys do not match the credential holder")
        return self.sig.to_bytes() + self.holder.to_bytes() + encode_scalar(keys.sk)

    def to_bytes(self) -> bytes:
        return wire.pack([
            self.sig.to_bytes(),
            self.holder.to_bytes(),
            wire.pack(c.to_bytes() for c in self.commitments),
            wire.pack(encode_scalar(o) for o in self.openings),
            wire.pack(encode_attributes(a) for a in self.attributes),
            wire.pack(wire.pack(p.to_bytes() for p in uk) for uk in self.update_keys),
            wire.u64(self.bound),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Credential":
        sig, holder, cs, os_, attrs, uks, bound = wire.unpack_exact(data, 7)
        return cls(
            Signature.from_bytes(sig),
            G1Point.from_bytes(holder),
            tuple(G1Point.from_bytes(c) for c in wire.unpack(cs)),
            tuple(decode_scalar(o) for o in wire.unpack(os_)),
            tuple(decode_attributes(a) for a in wire.unpack(attrs)),
            tuple(tuple(G1Point.from_bytes(p) for p in wire.unpack(uk)) for uk in wire.unpack(uks)),
            wire.from_u64(bound),
        )


def encode_attributes(attrs: AttributeSet) -> bytes:
    return wire.pack(wire.pack([a.role.encode(), a.value.encode("utf-8")]) for a in attrs)


def decode_attributes(data: bytes) -> AttributeSet:
    out = []
    for item in wire.unpack(data):
        role, value = wire.unpack_exact(item, 2)
        out.append(Attribute(role.decode(), value.decode("utf-8")))
    return AttributeSet(out)


# -- setup and keys ----------------------------------------------------------

def dac_setup(security: int = 100, t: int = 10, eta: int = 2, seed: bytes | int = 0,
              keep_trapdoor: bool = False) -> Tuple[DacParams, RootKeys]:
    if eta < 2:
        raise ValueError("eta must be >= 2")
    if eta > MAX_DEPTH:
        raise ValueError(f"eta exceeds ceiling {MAX_DEPTH}")
    seed_bytes = seed if isinstance(seed, bytes) else str(seed).encode()
    group = group_setup(security)
    sc = sc_setup(t, seed_bytes, keep_trapdoor=keep_trapdoor)

    def derive(label: int) -> int:
        return hash_to_scalar(b"slap/dac/root-key", seed_bytes + label.to_bytes(2, "big")) or 1

    x0 = derive(0)
    xs = tuple(derive(i) for i in range(1, eta + 1))
    pk = RootPublicKey(group.g2 * x0, tuple(group.g2 * x for x in xs))
    return DacParams(group, sc, eta), RootKeys(x0, xs, pk)


def dac_keygen(params: DacParams, rng: Optional[random.Random] = None) -> UserKeys:
    sk = random_scalar(rng)
    return UserKeys(sk, params.group.g1 * sk)


def nym_gen(params: DacParams, keys: UserKeys, rng: Optional[random.Random] = None,
            aux: Optional[int] = None, test_mode: bool = False) -> Pseudonym:
    """Fresh pseudonym aux*pk.  aux=0 means "no re-randomization" and is test-only."""
    if aux is None:
        aux = random_scalar(rng)
    elif aux % ORDER == 0:
        if not test_mode:
            raise ValueError("aux = 0 is only allowed in test mode")
        aux = 1
    return Pseudonym(keys.pk * aux, aux % ORDER)


# -- Schnorr proofs ----------------------------------------------------------

@dataclass(frozen=True)
class KeyProof:
    """Non-interactive proof of knowledge of s with K = s*P."""

    challenge: int
    response: int

    def to_bytes(self) -> bytes:
        return encode_scalar(self.challenge) + encode_scalar(self.response)

    @classmethod
    def from_bytes(cls, data: bytes) -> "KeyProof":
        if len(data) != 64:
            raise wire.WireError("key proof must be 64 bytes")
        return cls(decode_scalar(data[:32]), decode_scalar(data[32:]))


def _fs_challenge(tag: bytes, key: G1Point, commit: G1Point, bound_data: bytes) -> int:
    return hash_to_scalar(tag, wire.pack([key.to_bytes(), commit.to_bytes(), bound_data]))


def prove_key(params: DacParams, secret: int, key: G1Point, tag: bytes, bound_data: bytes,
              rng: Optional[random.Random] = None) -> KeyProof:
    r = random_scalar(rng)
    c = _fs_challenge(tag, key, params.group.g1 * r, bound_data)
    return KeyProof(c, (r + c * secret) % ORDER)


def verify_key(params: DacParams, key: G1Point, proof: KeyProof, tag: bytes, bound_data: bytes) -> bool:
    commit = params.group.g1 * proof.response - key * proof.challenge
    return _fs_challenge(tag, key, commit, bound_data) == proof.challenge


# -- signature core ----------------------------------------------------------

def _sign(params: DacParams, root: RootKeys, key: G1Point, commitments: Sequence[G1Point],
          bound: int, rng: Optional[random.Random]) -> Tuple[Signature, Tuple[UpdateKey, ...]]:
    g1, g2 = params.group.g1, params.group.g2
    y = random_scalar(rng)
    acc = key * root.binding_sk
    for x, c in zip(root.sk, commitments):
        acc = acc + c * x
    y_inv = pow(y, -1, ORDER)
    sig = Signature(acc * y, g1 * y_inv, g2 * y_inv, g1 * (y * root.binding_sk % ORDER))
    uks = tuple(
        tuple(b * (y * root.sk[j - 1] % ORDER) for b in params.sc.g1_basis)
        for j in range(len(commitments) + 1, bound + 1)
    )
    return sig, uks


def verify_signature(params: DacParams, root_pk: RootPublicKey, key: G1Point,
                     commitments: Sequence[G1Point], sig: Signature) -> bool:
    k = len(commitments)
    if not 1 <= k <= min(params.eta, len(root_pk.levels)):
        return False
    if any(p.is_identity() for p in (key, sig.Z, sig.Y, sig.T, *commitments)) or sig.Y_hat.is_identity():
        return False
    g1, g2 = params.group.g1, params.group.g2
    main = pairings_equal([(sig.Z, sig.Y_hat)],
                          [(key, root_pk.binding)] + list(zip(commitments, root_pk.levels)))
    return (main
            and pairings_equal([(sig.Y, g2)], [(g1, sig.Y_hat)])
            and pairings_equal([(sig.T, sig.Y_hat)], [(g1, root_pk.binding)]))


def _check_attrs(params: DacParams, attrs: AttributeSet):
    if len(attrs) > params.sc.t:
        raise OversizeSet(f"{len(attrs)} attributes exceed bound t={params.sc.t}")


# -- root issuance -----------------------------------------------------------

@dataclass(frozen=True)
class IssuanceRequest:
    nym: G1Point
    proof: KeyProof

    def to_bytes(self) -> bytes:
        return wire.pack([self.nym.to_bytes(), self.proof.to_bytes()])

    @classmethod
    def from_bytes(cls, data: bytes) -> "IssuanceRequest":
        nym, proof = wire.unpack_exact(data, 2)
        return cls(G1Point.from_bytes(nym), KeyProof.from_bytes(proof))


@dataclass(frozen=True)
class IssuanceResponse:
    sig: Signature
    commitments: Tuple[G1Point, ...]
    openings: Tuple[int, ...]
    attributes: Tuple[AttributeSet, ...]
    update_keys: Tuple[UpdateKey, ...]
    bound: int

    def to_bytes(self) -> bytes:
        return wire.pack([
            self.sig.to_bytes(),
            wire.pack(c.to_bytes() for c in self.commitments),
            wire.pack(encode_scalar(o) for o in self.openings),
            wire.pack(encode_attributes(a) for a in self.attributes),
            wire.pack(wire.pack(p.to_bytes() for p in uk) for uk in self.update_keys),
            wire.u64(self.bound),
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "IssuanceResponse":
        sig, cs, os_, attrs, uks, bound = wire.unpack_exact(data, 6)
        return cls(
            Signature.from_bytes(sig),
            tuple(G1Point.from_bytes(c) for c in wire.unpack(cs)),
            tuple(decode_scalar(o) for o in wire.unpack(os_)),
            tuple(decode_attributes(a) for a in wire.unpack(attrs)),
            tuple(tuple(G1Point.from_bytes(p) for p in wire.unpack(uk)) for uk in wire.unpack(uks)),
            wire.from_u64(bound),
        )


ISSUE_TAG = b"slap/dac/issue"
DELEGATE_TAG = b"slap/dac/delegate"
PRESENT_TAG = b"slap/dac/present"


def issuance_request(params: DacParams, keys: UserKeys, nym: Pseudonym, nonce: bytes,
                     rng: Optional[random.Random] = None, tag: bytes = ISSUE_TAG) -> IssuanceRequest:
    secret = keys.sk * nym.aux % ORDER
    return IssuanceRequest(nym.nym, prove_key(params, secret, nym.nym, tag, nonce, rng))


class RootIssuer:
    """Issuer side of the three-message issuance: nonce, request, response.

    Each session nonce is accepted once; replaying a request (in its own or
    any later session) is refused.
    """

    def __init__(self, params: DacParams, keys: RootKeys, rng: Optional[random.Random] = None):
        self.params = params
        self.keys = keys
        self.rng = rng or random.Random()
        self._sessions: Dict[int, bytes] = {}
        self._counter = itertools.count(1)

    @property
    def public_key(self) -> RootPublicKey:
        return self.keys.pk

    def open_session(self) -> Tuple[int, bytes]:
        sid = next(self._counter)
        nonce = self.rng.getrandbits(256).to_bytes(32, "big")
        self._sessions[sid] = nonce
        return sid, nonce

    def issue(self, sid: int, request: IssuanceRequest, attrs: AttributeSet,
              bound: int) -> IssuanceResponse:
        nonce = self._sessions.pop(sid, None)
        if nonce is None:
            raise IssuanceRefused("unknown or already used issuance session")
        if request.nym.is_identity() or not verify_key(self.params, request.nym, request.proof,
                                                       ISSUE_TAG, nonce):
            raise IssuanceRefused("proof of key knowledge failed")
        _check_attrs(self.params, attrs)
        if bound > self.params.eta:
            raise DelegationBoundExceeded(f"bound {bound} exceeds eta={self.params.eta}")
        bound = bound if bound > 1 else BOTTOM
        rho = random_scalar(self.rng)
        c1 = commit_with(self.params.sc, attrs, rho).point
        sig, uks = _sign(self.params, self.keys, request.nym, [c1], bound, self.rng)
        return IssuanceResponse(sig, (c1,), (rho,), (attrs,), uks, bound)


def _normalize(cred_sig: Signature, commitments, openings, uks, aux: int):
    """Move from the nym representation (K = aux*pk) back to K = pk."""
    mu = pow(aux, -1, ORDER)
    return (cred_sig.change_rep(mu, 1), tuple(c * mu for c in commitments),
            tuple(o * mu % ORDER for o in openings), uks)


def get_cred(params: DacParams, root_pk: RootPublicKey, keys: UserKeys, nym: Pseudonym,
             response: IssuanceResponse) -> Credential:
    if not verify_signature(params, root_pk, nym.nym, response.commitments, response.sig):
        raise IssuanceRefused("issued signature does not verify")
    for c, o, a in zip(response.commitments, response.openings, response.attributes):
        if commit_with(params.sc, a, o).point != c:
            raise IssuanceRefused("commitment opening mismatch")
    sig, cs, os_, uks = _normalize(response.sig, response.commitments, response.openings,
                                   response.update_keys, nym.aux)
    return Credential(sig, keys.pk, cs, os_, response.attributes, uks, response.bound)


def create_cred(issuer: RootIssuer, keys: UserKeys, attrs: AttributeSet, bound: int,
                rng: Optional[random.Random] = None) -> Credential:
    """Run the whole interactive issuance in-process."""
    params = issuer.params
    nym = nym_gen(params, keys, rng)
    sid, nonce = issuer.open_session()
    req = issuance_request(params, keys, nym, nonce, rng)
    return get_cred(params, issuer.public_key, keys, nym, issuer.issue(sid, req, attrs, bound))


# -- delegation --------------------------------------------------------------

@dataclass(frozen=True)
class DelegationGrant:
    """Key-stripped signature plus the extended commitment vector."""

    partial: Signature
    commitments: Tuple[G1Point, ...]
    openings: Tuple[int, ...]
    attributes: Tuple[AttributeSet, ...]
    update_keys: Tuple[UpdateKey, ...]
    bound: int

    def to_bytes(self) -> bytes:
        return IssuanceResponse(self.partial, self.commitments, self.openings, self.attributes,
                                self.update_keys, self.bound).to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "DelegationGrant":
        r = IssuanceResponse.from_bytes(data)
        return cls(r.sig, r.commitments, r.openings, r.attributes, r.update_keys, r.bound)


def delegation_request(params: DacParams, keys: UserKeys, nym: Pseudonym, nonce: bytes,
                       rng: Optional[random.Random] = None) -> IssuanceRequest:
    return issuance_request(params, keys, nym, nonce, rng, tag=DELEGATE_TAG)


def issue_cred(params: DacParams, cred: Credential, keys: UserKeys, request: IssuanceRequest,
               nonce: bytes, extra: AttributeSet, bound: int,
               rng: Optional[random.Random] = None) -> DelegationGrant:
    """Delegate `cred` to the requester, certifying `extra` at the next level.

    `bound` is the new delegation key bound; BOTTOM (0) stops the chain.
    """
    if request.nym.is_identity() or not verify_key(params, request.nym, request.proof,
                                                   DELEGATE_TAG, nonce):
        raise IssuanceRefused("delegatee proof of key knowledge failed")
    k = cred.depth
    if k + 1 > params.eta:
        raise DelegationDepthExceeded(f"credential at depth {k} cannot be extended (eta={params.eta})")
    if cred.bound < k + 1 or not cred.update_keys:
        raise DelegationBoundExceeded("delegation key does not allow further delegation")
    if bound > cred.bound:
        raise DelegationBoundExceeded(f"requested bound {bound} exceeds own bound {cred.bound}")
    if keys.pk != cred.holder:
        raise DelegationError("keys do not match the credential holder")
    _check_attrs(params, extra)

    mu, psi = random_scalar(rng), random_scalar(rng)
    sig = cred.sig.change_rep(mu, psi)
    uks = tuple(tuple(p * psi for p in uk) for uk in cred.update_keys)
    commitments = tuple(c * mu for c in cred.commitments)
    openings = tuple(o * mu % ORDER for o in cred.openings)
    # strip the delegator's key: Z - (mu*sk)*T
    z = sig.Z - sig.T * (mu * keys.sk % ORDER)
    rho = random_scalar(rng)
    coeffs = poly_from_roots(extra.scalars)
    new_c = _eval_in_exponent(params.sc.g1_basis, coeffs) * rho
    z = z + _eval_in_exponent(uks[0], coeffs) * rho
    new_bound = bound if bound > k + 1 else BOTTOM
    passed = uks[1:new_bound - k] if new_bound else ()
    return DelegationGrant(replace(sig, Z=z), commitments + (new_c,), openings + (rho,),
                           cred.attributes + (extra,), passed, new_bound)


def receive_cred(params: DacParams, root_pk: RootPublicKey, keys: UserKeys, nym: Pseudonym,
                 grant: DelegationGrant) -> Credential:
    secret = keys.sk * nym.aux % ORDER
    sig = replace(grant.partial, Z=grant.partial.Z + grant.partial.T * secret)
    if not verify_signature(params, root_pk, nym.nym, grant.commitments, sig):
        raise IssuanceRefused("delegated signature does not verify")
    for c, o, a in zip(grant.commitments, grant.openings, grant.attributes):
        if commit_with(params.sc, a, o).point != c:
            raise IssuanceRefused("commitment opening mismatch")
    sig, cs, os_, uks = _normalize(sig, grant.commitments, grant.openings, grant.update_keys, nym.aux)
    return Credential(sig, keys.pk, cs, os_, grant.attributes, uks, grant.bound)


def delegate(params: DacParams, root_pk: RootPublicKey, delegator_cred: Credential,
             delegator_keys: UserKeys, delegatee_keys: UserKeys, extra: AttributeSet,
             bound: int = BOTTOM, rng: Optional[random.Random] = None) -> Credential:
    """Both delegation roles in-process."""
    rng = rng or random.Random()
    nonce = rng.getrandbits(256).to_bytes(32, "big")
    nym = nym_gen(params, delegatee_keys, rng)
    req = delegation_request(params, delegatee_keys, nym, nonce, rng)
    grant = issue_cred(params, delegator_cred, delegator_keys, req, nonce, extra, bound, rng)
    return receive_cred(params, root_pk, delegatee_keys, nym, grant)


# -- presentation ------------------------------------------------------------

@dataclass(frozen=True)
class Presentation:
    nym: G1Point
    commitments: Tuple[G1Point, ...]
    sig: Signature
    disclosed: Tuple[AttributeSet, ...]
    witnesses: Tuple[Optional[G1Point], ...]
    proof: KeyProof

    def _body(self) -> List[bytes]:
        return [
            self.nym.to_bytes(),
            wire.pack(c.to_bytes() for c in self.commitments),
            self.sig.to_bytes(),
            wire.pack(encode_attributes(d) for d in self.disclosed),
            wire.pack(w.to_bytes() if w is not None else b"" for w in self.witnesses),
        ]

    def to_bytes(self) -> bytes:
        return wire.pack(self._body() + [self.proof.to_bytes()])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Presentation":
        nym, cs, sig, ds, ws, proof = wire.unpack_exact(data, 6)
        return cls(
            G1Point.from_bytes(nym),
            tuple(G1Point.from_bytes(c) for c in wire.unpack(cs)),
            Signature.from_bytes(sig),
            tuple(decode_attributes(d) for d in wire.unpack(ds)),
            tuple(G1Point.from_bytes(w) if w else None for w in wire.unpack(ws)),
            KeyProof.from_bytes(proof),
        )

    def credential_digest(self) -> bytes:
        """Stable per (credential, pseudonym): hashes nym and the scaled commitments."""
        h = hashlib.sha256(b"slap/dac/cred-digest")
        h.update(self.nym.to_bytes())
        for c in self.commitments:
            h.update(c.to_bytes())
        return h.digest()

    def group_elements(self) -> List[bytes]:
        out = [self.nym.to_bytes(), self.sig.Z.to_bytes(), self.sig.Y.to_bytes(),
               self.sig.T.to_bytes(), self.sig.Y_hat.to_bytes()]
        out += [c.to_bytes() for c in self.commitments]
        out += [w.to_bytes() for w in self.witnesses if w is not None]
        return out


def _presentation_statement(p: Presentation, context: bytes) -> bytes:
    return wire.pack(p._body() + [context])


def _normalize_disclosure(cred_depth: int, disclosed) -> Tuple[AttributeSet, ...]:
    if disclosed is None:
        disclosed = ()
    disclosed = tuple(disclosed)
    if len(disclosed) > cred_depth:
        raise SubsetViolation("disclosure names more levels than the credential has")
    return disclosed + tuple(AttributeSet() for _ in range(cred_depth - len(disclosed)))


def cred_prove(params: DacParams, keys: UserKeys, cred: Credential,
               disclosed: Optional[Sequence[AttributeSet]] = None, context: bytes = b"",
               rng: Optional[random.Random] = None,
               pseudonym: Optional[Pseudonym] = None) -> Presentation:
    """Randomized presentation disclosing `disclosed[i]` at level i+1.

    A fresh pseudonym is drawn unless one is passed; passing the same
    pseudonym keeps the nym and commitments (and so the credential digest)
    stable while the signature is still re-randomized.
    """
    if keys.pk != cred.holder:
        raise ValueError("keys do not match the credential holder")
    levels = _normalize_disclosure(cred.depth, disclosed)
    for d, a in zip(levels, cred.attributes):
        if not d.issubset(a):
            raise SubsetViolation("disclosed attributes are not certified by the credential")
    if pseudonym is None:
        pseudonym = nym_gen(params, keys, rng)
    elif keys.pk * pseudonym.aux != pseudonym.nym:
        raise ValueError("pseudonym does not belong to these keys")
    mu, psi = pseudonym.aux, random_scalar(rng)
    sig = cred.sig.change_rep(mu, psi)
    commitments = tuple(c * mu for c in cred.commitments)
    witnesses = []
    for d, a, o in zip(levels, cred.attributes, cred.openings):
        if len(d) == 0:
            witnesses.append(None)
        else:
            witnesses.append(sc_open_subset(params.sc, a, d, _Opening(o * mu % ORDER)).point)
    draft = Presentation(pseudonym.nym, commitments, sig, levels, tuple(witnesses), KeyProof(0, 0))
    proof = prove_key(params, keys.sk * mu % ORDER, pseudonym.nym, PRESENT_TAG,
                      _presentation_statement(draft, context), rng)
    return replace(draft, proof=proof)


@dataclass(frozen=True)
class _Opening:
    rho: int


def cred_verify(params: DacParams, root_pk: RootPublicKey, pres: Presentation,
                context: bytes = b"") -> bool:
    k = len(pres.commitments)
    if k == 0 or k > params.eta or len(pres.disclosed) != k or len(pres.witnesses) != k:
        return False
    if pres.nym.is_identity():
        return False
    if not verify_key(params, pres.nym, pres.proof, PRESENT_TAG, _presentation_statement(pres, context)):
        return False
    for c, d, w in zip(pres.commitments, pres.disclosed, pres.witnesses):
        if len(d) == 0:
            if w is not None:
                return False
            continue
        if w is None or not sc_verify_subset(params.sc, _SC(c), d, SubsetWitness(w)):
            return False
    return verify_signature(params, root_pk, pres.nym, pres.commitments, pres.sig)


@dataclass(frozen=True)
class _SC:
    point: G1Point
