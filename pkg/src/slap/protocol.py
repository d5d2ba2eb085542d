"""Entity state machines and the three protocol phases over the simulated network.

Entities: the regulator (root issuer and group manager), clients, access
points, nearby devices, and spectrum servers (database or CRN service).
Every interaction is a request/reply over `simnet.Network`, so each message
is timed and shows up in the trace.

Phases:
  location proof via an access point (group signature over the claim),
  location proof via a nearby device (distance bounding, then a delegated
  credential carrying the location), and query/notify against a spectrum
  server gated by a time-lock puzzle.
"""
from __future__ import annotations

import hashlib
import hmac
import math
import random
import struct
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import wire
from .dac import (BOTTOM, Credential, DacParams, DelegationError, DelegationGrant,
                  IssuanceRefused, IssuanceRequest, IssuanceResponse, Presentation,
                  Pseudonym, RootIssuer, RootPublicKey, UserKeys, cred_prove, cred_verify,
                  dac_keygen, dac_setup, delegation_request,
                  get_cred, issuance_request, issue_cred, nym_gen, receive_cred)
from .dbp import (DbpVerifier, HonestProver, aka_derive, dbp_run, to_bits)
from .gsig import (SLAP_FIELDS, GroupSignature, GsKeys, GsParams, field_scalar,
                   gs_keygen, gs_setup, gs_sign, gs_verify)
from .group import G1Point
from .ranging import (BeaconClock, EnvParams, RangingInconsistency, in_coverage,
                      prox_verify)
from .setcommit import Attribute, AttributeSet
from .simnet import Endpoint, Message, Network, Reply
from .store import NoCoverage, PopulateRejected, Query, SpectrumStore, Submission, RECORD_SIZE
from .tlp import (DifficultyPolicy, Puzzle, PuzzleKeys, PuzzlePool, PuzzleRegistry,
                  PuzzleSolution, SquaringCounter, difficulty_for, message_element,
                  puzzle_solve, solution_verify)

NS = 1_000_000_000
MAX_PAYLOAD = 255
_LOC = struct.Struct(">dd")
_TS = struct.Struct(">q")


# -- profiles and configuration ---------------------------------------------

@dataclass(frozen=True)
class Profile:
    name: str
    rsa_bits: int
    require_disjoint: bool
    dbp_rounds: int


PROFILES = {
    "toy": Profile("toy", 512, False, 16),
    "production": Profile("production", 2048, True, 32),
}


@dataclass
class ProtocolConfig:
    seed: int = 0
    profile: Profile = PROFILES["toy"]
    security: int = 100
    t: int = 10
    eta: int = 2
    freshness_ns: int = 60 * NS
    coverage_margin_m: float = 5.0
    ap_coverage_m: float = 200.0
    dbp_threshold_m: float = 50.0
    dbp_allowance_ns: float = 0.0
    threat_level: str = "low"
    policy: DifficultyPolicy = field(default_factory=DifficultyPolicy)
    beacon_window_ns: int = 200_000_000
    realistic: bool = False


# -- rejections --------------------------------------------------------------

class ProtocolRejection(Exception):
    code = "rejected"

    def __init__(self, reason: str = "", step: str = ""):
        super().__init__(reason or self.code)
        self.reason = reason
        self.step = step


class CredentialRejected(ProtocolRejection):
    code = "credential"


class FreshnessRejected(ProtocolRejection):
    code = "freshness"


class BeaconRejected(ProtocolRejection):
    code = "beacon"


class RangingRejected(ProtocolRejection):
    code = "ranging"


class CoverageRejected(ProtocolRejection):
    code = "coverage"


class SignatureRejected(ProtocolRejection):
    code = "signature"


class ProofOfLocationRejected(ProtocolRejection):
    code = "pol"


class LocationMismatch(ProtocolRejection):
    code = "location-mismatch"


class DistanceBoundRejected(ProtocolRejection):
    code = "distance-bound"


class DelegationRejected(ProtocolRejection):
    code = "delegation"


class NoCoverageRejected(ProtocolRejection):
    code = "no-coverage"


class PuzzleRejected(ProtocolRejection):
    code = "puzzle"


class MalformedMessage(ProtocolRejection):
    code = "malformed"


_REJECTIONS = {cls.code: cls for cls in (
    CredentialRejected, FreshnessRejected, BeaconRejected, RangingRejected, CoverageRejected,
    SignatureRejected, ProofOfLocationRejected, LocationMismatch, DistanceBoundRejected,
    DelegationRejected, NoCoverageRejected, PuzzleRejected, MalformedMessage)}


def _reject_reply(exc: ProtocolRejection) -> Reply:
    return Reply("reject", wire.pack([exc.code.encode(), exc.reason.encode(), exc.step.encode()]))


def _raise_if_rejected(msg: Message, expected: str):
    if msg.type == "reject":
        code, reason, step = (f.decode() for f in wire.unpack_exact(msg.payload, 3))
        raise _REJECTIONS.get(code, ProtocolRejection)(reason, step)
    if msg.type != expected:
        raise MalformedMessage(f"expected {expected!r}, got {msg.type!r}")


def _handler(method):
    """Wrap an entity handler: map rejections and decode errors to reject replies."""
    def run(self, msg: Message) -> Optional[Reply]:
        start = time.perf_counter()
        try:
            reply = method(self, msg)
        except ProtocolRejection as exc:
            reply = _reject_reply(exc)
        except (wire.WireError, ValueError) as exc:
            reply = _reject_reply(MalformedMessage(str(exc), msg.type))
        elapsed = time.perf_counter() - start
        self.crypto_seconds[msg.type] = self.crypto_seconds.get(msg.type, 0.0) + elapsed
        if reply is not None and getattr(self, "realistic", False):
            reply = Reply(reply.type, reply.payload, reply.extra_ns + int(elapsed * NS))
        return reply
    return run


# -- encodings ---------------------------------------------------------------

def encode_location(x: float, y: float) -> bytes:
    return _LOC.pack(x, y)


def decode_location(data: bytes) -> Tuple[float, float]:
    if len(data) != _LOC.size:
        raise wire.WireError("location must be 16 bytes")
    return _LOC.unpack(data)


def encode_ts(ts: int) -> bytes:
    return _TS.pack(ts)


def decode_ts(data: bytes) -> int:
    if len(data) != _TS.size:
        raise wire.WireError("timestamp must be 8 bytes")
    return _TS.unpack(data)[0]


def location_text(x: float, y: float) -> str:
    return f"{x:.3f},{y:.3f}"


def location_attributes(x: float, y: float, ts: int, device_class: str, device_type: str) -> AttributeSet:
    return AttributeSet([Attribute("location", location_text(x, y)), Attribute("timestamp", str(ts)),
                         Attribute("device-class", device_class), Attribute("device-type", device_type)])


@dataclass(frozen=True)
class LocationProofAP:
    sig: GroupSignature
    x: float
    y: float
    ts: int
    nym: G1Point
    cred_digest: bytes
    region: str

    def fields(self) -> List[int]:
        return signed_fields(self.x, self.y, self.ts, self.nym, self.cred_digest, self.region)

    def to_bytes(self) -> bytes:
        return wire.pack([self.sig.to_bytes(), encode_location(self.x, self.y), encode_ts(self.ts),
                          self.nym.to_bytes(), self.cred_digest, self.region.encode()])

    @classmethod
    def from_bytes(cls, data: bytes) -> "LocationProofAP":
        sig, loc, ts, nym, digest, region = wire.unpack_exact(data, 6)
        if len(digest) != 32:
            raise wire.WireError("credential digest must be 32 bytes")
        x, y = decode_location(loc)
        return cls(GroupSignature.from_bytes(sig), x, y, decode_ts(ts), G1Point.from_bytes(nym),
                   digest, region.decode())


def signed_fields(x: float, y: float, ts: int, nym: G1Point, cred_digest: bytes, region: str) -> List[int]:
    return [field_scalar("location-x", struct.pack(">d", x)),
            field_scalar("location-y", struct.pack(">d", y)),
            field_scalar("timestamp", ts),
            field_scalar("nym", nym.to_bytes()),
            field_scalar("credential", cred_digest),
            field_scalar("region", region)]


def pol_ap_context(ap_id: str, loc: bytes, ts: int, token: bytes) -> bytes:
    return wire.pack([b"slap/pol-ap", ap_id.encode(), loc, encode_ts(ts), token])


def query_context(server_id: str, query: bytes, proof: bytes) -> bytes:
    return wire.pack([b"slap/query", server_id.encode(), query, proof])


def notify_context(server_id: str, puzzle_digest: bytes, payload: bytes, solution: bytes) -> bytes:
    return wire.pack([b"slap/notify", server_id.encode(), puzzle_digest, payload, solution])


def hello_context(nd_id: str, nonce: bytes) -> bytes:
    return wire.pack([b"slap/pol-nd/hello", nd_id.encode(), nonce])


def hello_reply_context(nd_id: str, client_nonce: bytes, nd_nonce: bytes) -> bytes:
    return wire.pack([b"slap/pol-nd/hello-reply", nd_id.encode(), client_nonce, nd_nonce])


def solution_message(payload: bytes, puzzle: Puzzle) -> int:
    return message_element(payload + puzzle.digest(), puzzle.n)


def disclosed_value(pres: Presentation, role: str) -> Optional[str]:
    """Value of `role` disclosed at the deepest level that discloses it."""
    for level in reversed(pres.disclosed):
        v = level.get(role)
        if v is not None:
            return v
    return None


# -- regulator ---------------------------------------------------------------

@dataclass(frozen=True)
class PublicMaterial:
    dac: DacParams
    root_pk: RootPublicKey
    gs: GsParams
    group_keys: Dict[str, G1Point]


class Fcc:
    """Root issuer and per-region group manager."""

    def __init__(self, config: ProtocolConfig, regions: List[str], endpoint_id: str = "fcc"):
        self.config = config
        self.id = endpoint_id
        seed = config.seed.to_bytes(8, "big", signed=True)
        self.rng = random.Random(hashlib.sha256(b"fcc" + seed).digest())
        self.dac, self.root = dac_setup(config.security, config.t, config.eta, b"slap/fcc/" + seed)
        self.issuer = RootIssuer(self.dac, self.root, self.rng)
        self.gs = gs_setup(len(SLAP_FIELDS), b"slap/fcc/gs/" + seed)
        self.region_keys: Dict[str, GsKeys] = {r: gs_keygen(self.gs, self.rng) for r in regions}
        self.puzzle_registry = PuzzleRegistry()
        self.enrolled: Dict[bytes, AttributeSet] = {}
        self.crypto_seconds: Dict[str, float] = {}
        self._pending: Dict[int, AttributeSet] = {}

    @property
    def public(self) -> PublicMaterial:
        return PublicMaterial(self.dac, self.root.pk, self.gs,
                              {r: k.gk for r, k in self.region_keys.items()})

    def enroll(self, device_id: str, attrs: AttributeSet):
        """Out-of-band device registration; issuance certifies exactly these attributes."""
        self.enrolled[device_id.encode()] = attrs

    def attach(self, net: Network, position=(0.0, 0.0)):
        net.add(Endpoint(self.id, *position, radio_range_m=0.0))
        net.attach(self.id, self.handle)

    @_handler
    def handle(self, msg: Message) -> Optional[Reply]:
        if msg.type == "issue-hello":
            (device_id,) = wire.unpack_exact(msg.payload, 1)
            attrs = self.enrolled.get(device_id)
            if attrs is None:
                raise CredentialRejected("device not enrolled", "issuance")
            sid, nonce = self.issuer.open_session()
            self._pending[sid] = attrs
            return Reply("issue-nonce", wire.pack([wire.u64(sid), nonce]))
        if msg.type == "issue-request":
            sid_b, req = wire.unpack_exact(msg.payload, 2)
            sid = wire.from_u64(sid_b)
            attrs = self._pending.pop(sid, None)
            if attrs is None:
                raise CredentialRejected("unknown issuance session", "issuance")
            try:
                resp = self.issuer.issue(sid, IssuanceRequest.from_bytes(req), attrs, self.config.eta)
            except IssuanceRefused as exc:
                raise CredentialRejected(str(exc), "issuance") from None
            return Reply("issue-response", resp.to_bytes())
        raise MalformedMessage(f"unexpected {msg.type!r}")


# -- users -------------------------------------------------------------------

@dataclass
class QueryGrant:
    record: bytes
    puzzle: Puzzle
    pseudonym: Pseudonym
    credential: Credential
    disclosure: Tuple[AttributeSet, ...]
    server_id: str


class User:
    """A registered device: holds keys and a level-1 credential."""

    def __init__(self, id: str, net: Network, public: PublicMaterial, config: ProtocolConfig,
                 position: Tuple[float, float], device_class: str = "mobile",
                 device_type: str = "SU", radio_range_m: float = 300.0):
        self.id = id
        self.net = net
        self.public = public
        self.config = config
        self.position = position
        self.device_class = device_class
        self.device_type = device_type
        self.rng = random.Random(hashlib.sha256(f"user/{id}/{config.seed}".encode()).digest())
        self.keys: UserKeys = dac_keygen(public.dac, self.rng)
        self.attributes = AttributeSet([Attribute("device-id", id), Attribute("device-type", device_type),
                                        Attribute("device-class", device_class)])
        self.cred: Optional[Credential] = None
        self.delegated: Optional[Credential] = None
        self.crypto_seconds: Dict[str, float] = {}
        self.realistic = config.realistic
        self._dbp_responder = None
        self._pending_hello: Optional[Tuple[Pseudonym, bytes]] = None
        net.add(Endpoint(id, *position, radio_range_m=radio_range_m))
        net.attach(id, self.handle)

    # registration ----------------------------------------------------------

    def register(self, fcc_id: str = "fcc") -> Credential:
        reply = self.net.request(self.id, fcc_id, "issue-hello", wire.pack([self.id.encode()]), "wired")
        _raise_if_rejected(reply, "issue-nonce")
        sid, nonce = wire.unpack_exact(reply.payload, 2)
        nym = nym_gen(self.public.dac, self.keys, self.rng)
        req = issuance_request(self.public.dac, self.keys, nym, nonce, self.rng)
        reply = self.net.request(self.id, fcc_id, "issue-request", wire.pack([sid, req.to_bytes()]), "wired")
        _raise_if_rejected(reply, "issue-response")
        try:
            self.cred = get_cred(self.public.dac, self.public.root_pk, self.keys, nym,
                                 IssuanceResponse.from_bytes(reply.payload))
        except IssuanceRefused as exc:
            raise CredentialRejected(str(exc), "issuance") from None
        return self.cred

    def prove(self, cred: Credential, disclosed, context: bytes, pseudonym: Optional[Pseudonym] = None
              ) -> Presentation:
        return cred_prove(self.public.dac, self.keys, cred, disclosed, context, self.rng, pseudonym)

    def own_disclosure(self, cred: Credential, roles=("device-class",)) -> Tuple[AttributeSet, ...]:
        """Disclose `roles` from the deepest level, nothing elsewhere."""
        levels = [AttributeSet() for _ in range(cred.depth)]
        top = cred.attributes[-1]
        levels[-1] = AttributeSet(a for a in top if a.role in roles)
        return tuple(levels)

    # incoming messages -------------------------------------------------------

    @_handler
    def handle(self, msg: Message) -> Optional[Reply]:
        if msg.type == "range-probe":
            return Reply("range-ack", msg.payload)
        if msg.type == "dbp-pad":
            if self._dbp_responder is None:
                raise DistanceBoundRejected("no distance-bounding session", "dbp")
            n_bits = wire.from_u64(msg.payload[:8])
            self._dbp_responder.receive_pad(to_bits(msg.payload[8:], n_bits))
            return Reply("dbp-pad-ack", b"")
        if msg.type == "dbp-challenge":
            if self._dbp_responder is None:
                raise DistanceBoundRejected("no distance-bounding session", "dbp")
            i, c = struct.unpack(">HB", msg.payload)
            return Reply("dbp-response", bytes([self._dbp_responder.respond(i, c)]))
        return self.handle_extra(msg)

    def handle_extra(self, msg: Message) -> Optional[Reply]:
        raise MalformedMessage(f"unexpected {msg.type!r}")


class Client(User):
    # PoL via access point -------------------------------------------------

    def pol_ap(self, ap_id: str, claimed: Optional[Tuple[float, float]] = None,
               ts: Optional[int] = None, pseudonym: Optional[Pseudonym] = None
               ) -> Tuple[LocationProofAP, Pseudonym]:
        if self.cred is None:
            raise CredentialRejected("not registered", "pol-ap")
        claimed = claimed or self.position
        beacon = self.net.request(self.id, ap_id, "beacon-req", b"")
        _raise_if_rejected(beacon, "beacon")
        token = beacon.payload
        ts = self.net.now_ns if ts is None else ts
        loc = encode_location(*claimed)
        pseudonym = pseudonym or nym_gen(self.public.dac, self.keys, self.rng)
        pres = self.prove(self.cred, None, pol_ap_context(ap_id, loc, ts, token), pseudonym)
        reply = self.net.request(self.id, ap_id, "pol-ap",
                                 wire.pack([loc, encode_ts(ts), token, pres.to_bytes()]))
        _raise_if_rejected(reply, "pol-ap-ok")
        phi = LocationProofAP.from_bytes(reply.payload)
        gk = self.public.group_keys.get(phi.region)
        if gk is None or not gs_verify(self.public.gs, gk, phi.fields(), phi.sig):
            raise SignatureRejected("access-point signature does not verify", "pol-ap/10")
        if phi.nym != pseudonym.nym or (phi.x, phi.y) != tuple(claimed) or phi.ts != ts:
            raise SignatureRejected("signed fields differ from the request", "pol-ap/10")
        return phi, pseudonym

    # PoL via nearby device ------------------------------------------------

    def pol_nd(self, nd_id: str, claimed: Optional[Tuple[float, float]] = None,
               ts: Optional[int] = None) -> Credential:
        if self.cred is None:
            raise CredentialRejected("not registered", "pol-nd")
        dac = self.public.dac
        claimed = claimed or self.position
        nonce = self.rng.getrandbits(256).to_bytes(32, "big")
        nym = nym_gen(dac, self.keys, self.rng)
        hello = self.prove(self.cred, self.own_disclosure(self.cred, ("device-class", "device-type")),
                           hello_context(nd_id, nonce), nym)
        reply = self.net.request(self.id, nd_id, "nd-hello", wire.pack([hello.to_bytes(), nonce]))
        _raise_if_rejected(reply, "nd-hello-ok")
        nd_pres_b, nd_nonce = wire.unpack_exact(reply.payload, 2)
        nd_pres = Presentation.from_bytes(nd_pres_b)
        if not cred_verify(dac, self.public.root_pk, nd_pres, hello_reply_context(nd_id, nonce, nd_nonce)):
            raise CredentialRejected("nearby device credential does not verify", "pol-nd/2")
        rounds = self.config.profile.dbp_rounds
        ss = aka_derive(self.keys.sk * nym.aux, nym.nym, nd_pres.nym, nonce + nd_nonce, "prover", rounds)
        self._dbp_responder = HonestProver(ss)
        ts = self.net.now_ns if ts is None else ts
        req = delegation_request(dac, self.keys, nym, nd_nonce, self.rng)
        try:
            reply = self.net.request(self.id, nd_id, "nd-pol",
                                     wire.pack([encode_location(*claimed), encode_ts(ts), req.to_bytes()]))
        finally:
            self._dbp_responder = None
        _raise_if_rejected(reply, "nd-grant")
        try:
            self.delegated = receive_cred(dac, self.public.root_pk, self.keys, nym,
                                          DelegationGrant.from_bytes(reply.payload))
        except IssuanceRefused as exc:
            raise DelegationRejected(str(exc), "pol-nd/12") from None
        return self.delegated

    # spectrum query and notify --------------------------------------------

    def query(self, server_id: str, freq_mhz: int, phi: Optional[LocationProofAP] = None,
              pseudonym: Optional[Pseudonym] = None, claimed: Optional[Tuple[float, float]] = None,
              ts: Optional[int] = None) -> QueryGrant:
        """Query via the AP path (phi given) or the ND path (delegated credential)."""
        ts = self.net.now_ns if ts is None else ts
        if phi is not None:
            if pseudonym is None:
                raise ValueError("the AP path reuses the pseudonym bound into the proof")
            cred = self.cred
            claimed = claimed or (phi.x, phi.y)
            proof = b"A" + phi.to_bytes()
            disclosure = self.own_disclosure(cred)
        else:
            cred = self.delegated
            if cred is None:
                raise ProofOfLocationRejected("no location proof held", "query")
            claimed = claimed or self.position
            pseudonym = nym_gen(self.public.dac, self.keys, self.rng)
            proof = b"N"
            level2 = AttributeSet(a for a in cred.attributes[-1]
                                  if a.role in ("location", "timestamp", "device-class"))
            disclosure = (AttributeSet(), level2)
        rho = Query(claimed[0], claimed[1], ts, freq_mhz).to_bytes()
        pres = self.prove(cred, disclosure, query_context(server_id, rho, proof), pseudonym)
        reply = self.net.request(self.id, server_id, "query", wire.pack([rho, proof, pres.to_bytes()]),
                                 "wired")
        _raise_if_rejected(reply, "query-ok")
        record, puzzle = wire.unpack_exact(reply.payload, 2)
        if len(record) != RECORD_SIZE:
            raise MalformedMessage("spectrum record has the wrong size")
        return QueryGrant(record, Puzzle.from_bytes(puzzle), pseudonym, cred, disclosure, server_id)

    def solve(self, grant: QueryGrant, payload: bytes,
              counter: Optional[SquaringCounter] = None) -> PuzzleSolution:
        return puzzle_solve(solution_message(payload, grant.puzzle), grant.puzzle, counter)

    def notify(self, grant: QueryGrant, payload: bytes, solution: Optional[PuzzleSolution] = None,
               counter: Optional[SquaringCounter] = None, disclose_type: bool = False) -> bytes:
        if len(payload) > MAX_PAYLOAD:
            raise ValueError(f"payload exceeds {MAX_PAYLOAD} bytes")
        solution = solution or self.solve(grant, payload, counter)
        sol_b = solution.to_bytes(grant.puzzle.width)
        digest = grant.puzzle.digest()
        disclosure = grant.disclosure
        if disclose_type:
            roles = {a.role for a in disclosure[-1]} | {"device-type"}
            disclosure = disclosure[:-1] + (AttributeSet(a for a in grant.credential.attributes[-1]
                                                         if a.role in roles),)
        pres = self.prove(grant.credential, disclosure,
                          notify_context(grant.server_id, digest, payload, sol_b), grant.pseudonym)
        reply = self.net.request(self.id, grant.server_id, "notify",
                                 wire.pack([payload, digest, sol_b, pres.to_bytes()]), "wired")
        _raise_if_rejected(reply, "notify-ok")
        return reply.payload


class NearbyDevice(User):
    """Registered user acting as a location witness for clients out of AP range."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._sessions: Dict[str, Tuple[Pseudonym, Presentation, bytes, bytes]] = {}
        self.last_transcript = None

    def handle_extra(self, msg: Message) -> Optional[Reply]:
        dac = self.public.dac
        if msg.type == "nd-hello":
            pres_b, client_nonce = wire.unpack_exact(msg.payload, 2)
            pres = Presentation.from_bytes(pres_b)
            if not cred_verify(dac, self.public.root_pk, pres, hello_context(self.id, client_nonce)):
                raise CredentialRejected("client credential does not verify", "pol-nd/2")
            if disclosed_value(pres, "device-class") is None or disclosed_value(pres, "device-type") is None:
                raise CredentialRejected("client must disclose its device class and type", "pol-nd/2")
            nd_nonce = self.rng.getrandbits(256).to_bytes(32, "big")
            nym = nym_gen(dac, self.keys, self.rng)
            own = self.prove(self.cred, None, hello_reply_context(self.id, client_nonce, nd_nonce), nym)
            self._sessions[msg.src] = (nym, pres, client_nonce, nd_nonce)
            return Reply("nd-hello-ok", wire.pack([own.to_bytes(), nd_nonce]))
        if msg.type == "nd-pol":
            session = self._sessions.pop(msg.src, None)
            if session is None:
                raise CredentialRejected("no hello for this peer", "pol-nd/1")
            nym, client_pres, client_nonce, nd_nonce = session
            loc_b, ts_b, req_b = wire.unpack_exact(msg.payload, 3)
            claimed, ts = decode_location(loc_b), decode_ts(ts_b)
            if abs(self.net.now_ns - ts) > self.config.freshness_ns:
                raise FreshnessRejected("timestamp outside freshness window", "pol-nd")
            req = IssuanceRequest.from_bytes(req_b)
            if req.nym != client_pres.nym:
                raise DelegationRejected("delegation pseudonym differs from the verified one", "pol-nd/9")
            rounds = self.config.profile.dbp_rounds
            ss = aka_derive(self.keys.sk * nym.aux, nym.nym, client_pres.nym,
                            client_nonce + nd_nonce, "verifier", rounds)
            ok, transcript = self.distance_bound(msg.src, ss)
            self.last_transcript = transcript
            if not ok:
                raise DistanceBoundRejected(transcript.reason, "pol-nd/7")
            if math.dist(claimed, self.position) > self.config.dbp_threshold_m:
                raise CoverageRejected("claimed location outside the distance bound", "pol-nd/8")
            extension = location_attributes(claimed[0], claimed[1], ts,
                                            disclosed_value(client_pres, "device-class"),
                                            disclosed_value(client_pres, "device-type"))
            try:
                grant = issue_cred(dac, self.cred, self.keys, req, nd_nonce, extension, BOTTOM, self.rng)
            except (IssuanceRefused, DelegationError) as exc:
                raise DelegationRejected(str(exc), "pol-nd/10") from None
            return Reply("nd-grant", grant.to_bytes())
        raise MalformedMessage(f"unexpected {msg.type!r}")

    def distance_bound(self, prover_id: str, session_key):
        verifier = DbpVerifier(tuple(session_key), self.config.dbp_threshold_m, self.config.dbp_allowance_ns)
        return dbp_run(verifier, SimDbpChannel(self.net, self.id, prover_id), self.rng)


class SimDbpChannel:
    """Rapid bit exchange carried over simulated radio messages."""

    def __init__(self, net: Network, verifier_id: str, prover_id: str):
        self.net = net
        self.verifier_id = verifier_id
        self.prover_id = prover_id

    def deliver_pad(self, pad):
        packed = bytes(int("".join(map(str, pad[i:i + 8])).ljust(8, "0"), 2) for i in range(0, len(pad), 8))
        reply = self.net.request(self.verifier_id, self.prover_id, "dbp-pad", wire.u64(len(pad)) + packed)
        _raise_if_rejected(reply, "dbp-pad-ack")

    def exchange(self, round_index: int, challenge: int):
        start = self.net.now_ns
        reply = self.net.request(self.verifier_id, self.prover_id, "dbp-challenge",
                                 struct.pack(">HB", round_index, challenge))
        _raise_if_rejected(reply, "dbp-response")
        return reply.payload[0], reply.deliver_ns - start


# -- access point ------------------------------------------------------------

class AccessPoint:
    def __init__(self, id: str, net: Network, public: PublicMaterial, region: str, keys: GsKeys,
                 config: ProtocolConfig, position: Tuple[float, float], env: Optional[EnvParams] = None,
                 radio_range_m: float = 300.0):
        self.id = id
        self.net = net
        self.public = public
        self.region = region
        self.keys = keys
        self.config = config
        self.position = position
        self.env = env or net.env
        self.rng = random.Random(hashlib.sha256(f"ap/{id}/{config.seed}".encode()).digest())
        self.beacon = BeaconClock(hashlib.sha256(f"beacon/{id}/{config.seed}".encode()).digest(),
                                  config.beacon_window_ns)
        self.crypto_seconds: Dict[str, float] = {}
        self.realistic = config.realistic
        self.issued = 0
        net.add(Endpoint(id, *position, processing_ns=int(self.env.processing_ns), radio_range_m=radio_range_m))
        net.attach(id, self.handle)

    @_handler
    def handle(self, msg: Message) -> Optional[Reply]:
        if msg.type == "beacon-req":
            return Reply("beacon", self.beacon.token(self.net.now_ns))
        if msg.type != "pol-ap":
            raise MalformedMessage(f"unexpected {msg.type!r}")
        loc_b, ts_b, token, pres_b = wire.unpack_exact(msg.payload, 4)
        claimed, ts = decode_location(loc_b), decode_ts(ts_b)
        now = self.net.now_ns
        if abs(now - ts) > self.config.freshness_ns:
            raise FreshnessRejected("timestamp outside freshness window", "pol-ap/2")
        if not self.beacon.fresh(token, now):
            raise BeaconRejected("beacon token expired or unknown", "pol-ap/2")
        pres = Presentation.from_bytes(pres_b)
        if not cred_verify(self.public.dac, self.public.root_pk, pres,
                           pol_ap_context(self.id, loc_b, ts, token)):
            raise CredentialRejected("credential presentation does not verify", "pol-ap/4")
        rss = msg.rss_dbm
        start = self.net.now_ns
        probe = self.net.request(self.id, msg.src, "range-probe", self.rng.getrandbits(64).to_bytes(8, "big"))
        _raise_if_rejected(probe, "range-ack")
        rtt = probe.deliver_ns - start
        try:
            delta = prox_verify(rss, rtt, self.env)
        except (RangingInconsistency, ValueError) as exc:
            raise RangingRejected(str(exc), "pol-ap/5") from None
        if delta > self.config.ap_coverage_m or not in_coverage(
                delta, claimed, self.position, self.config.coverage_margin_m):
            raise CoverageRejected(f"claim outside coverage (estimate {delta:.1f} m)", "pol-ap/6")
        digest = pres.credential_digest()
        fields = signed_fields(claimed[0], claimed[1], ts, pres.nym, digest, self.region)
        sig = gs_sign(self.public.gs, self.keys, fields, self.rng)
        self.issued += 1
        return Reply("pol-ap-ok", LocationProofAP(sig, *claimed, ts, pres.nym, digest, self.region).to_bytes())


# -- spectrum server ---------------------------------------------------------

@dataclass
class PendingPuzzle:
    keys: PuzzleKeys
    link: bytes
    query: Query
    issued_ns: int


@dataclass
class ServerCounters:
    cred_verifications: int = 0
    modexps: int = 0
    gs_verifications: int = 0
    rejected: int = 0
    accepted: int = 0


class SpectrumServer:
    """Spectrum database (mode "psd") or CRN service endpoint (mode "crn")."""

    def __init__(self, id: str, net: Network, public: PublicMaterial, config: ProtocolConfig,
                 store: Optional[SpectrumStore] = None, mode: str = "psd",
                 registry: Optional[PuzzleRegistry] = None, position=(0.0, 0.0)):
        if mode not in ("psd", "crn"):
            raise ValueError(f"unknown server mode {mode!r}")
        if mode == "psd" and store is None:
            raise ValueError("a database server needs a store")
        self.id = id
        self.net = net
        self.public = public
        self.config = config
        self.store = store
        self.mode = mode
        self.rng = random.Random(hashlib.sha256(f"server/{id}/{config.seed}".encode()).digest())
        self.pool = PuzzlePool(config.profile.rsa_bits, self.rng, registry,
                               config.profile.require_disjoint)
        self.pending: Dict[bytes, PendingPuzzle] = {}
        self.counters = ServerCounters()
        self.notifications: List[Tuple[bytes, bytes]] = []
        self.grants: List[bytes] = []
        self.crypto_seconds: Dict[str, float] = {}
        self.realistic = config.realistic
        self._secret = hashlib.sha256(f"grant/{id}/{config.seed}".encode()).digest()
        net.add(Endpoint(id, *position, radio_range_m=0.0))
        net.attach(id, self.handle)

    def _verify_presentation(self, pres: Presentation, context: bytes, step: str):
        self.counters.cred_verifications += 1
        if not cred_verify(self.public.dac, self.public.root_pk, pres, context):
            raise CredentialRejected("credential presentation does not verify", step)

    @_handler
    def handle(self, msg: Message) -> Optional[Reply]:
        try:
            if msg.type == "query":
                reply = self._query(msg)
            elif msg.type == "notify":
                reply = self._notify(msg)
            else:
                raise MalformedMessage(f"unexpected {msg.type!r}")
        except (ProtocolRejection, wire.WireError, ValueError):
            self.counters.rejected += 1
            raise
        self.counters.accepted += 1
        return reply

    def _query(self, msg: Message) -> Reply:
        rho_b, proof, pres_b = wire.unpack_exact(msg.payload, 3)
        query = Query.from_bytes(rho_b)
        now = self.net.now_ns
        if abs(now - query.ts_ns) > self.config.freshness_ns:
            raise FreshnessRejected("query timestamp outside freshness window", "query/8")
        pres = Presentation.from_bytes(pres_b)
        self._verify_presentation(pres, query_context(self.id, rho_b, proof), "query/9")
        if proof[:1] == b"A":
            phi = LocationProofAP.from_bytes(proof[1:])
            if abs(now - phi.ts) > self.config.freshness_ns:
                raise FreshnessRejected("location proof is stale", "query/10")
            gk = self.public.group_keys.get(phi.region)
            self.counters.gs_verifications += 1
            if gk is None or not gs_verify(self.public.gs, gk, phi.fields(), phi.sig):
                raise ProofOfLocationRejected("access-point signature does not verify", "query/10")
            if phi.nym != pres.nym or phi.cred_digest != pres.credential_digest():
                raise ProofOfLocationRejected("location proof bound to another pseudonym", "query/10")
            if (phi.x, phi.y) != (query.x, query.y):
                raise LocationMismatch("queried location differs from the proven one", "query/10")
        elif proof == b"N":
            if len(pres.disclosed) != 2:
                raise ProofOfLocationRejected("no delegated location credential", "query/15")
            loc = pres.disclosed[1].get("location")
            ts_text = pres.disclosed[1].get("timestamp")
            if loc is None or ts_text is None:
                raise ProofOfLocationRejected("location attributes not disclosed", "query/15")
            if abs(now - int(ts_text)) > self.config.freshness_ns:
                raise FreshnessRejected("location proof is stale", "query/15")
            if loc != location_text(query.x, query.y):
                raise LocationMismatch("queried location differs from the proven one", "query/15")
        else:
            raise MalformedMessage("unknown proof kind")
        device_class = disclosed_value(pres, "device-class") or "unknown"
        try:
            record = self.store.lookup(query).to_bytes() if self.store else bytes(RECORD_SIZE)
        except NoCoverage as exc:
            raise NoCoverageRejected(str(exc), "query") from None
        kappa = difficulty_for(device_class, self.config.threat_level, self.config.policy)
        keys = self.pool.take(kappa)
        digest = keys.puzzle.digest()
        self.pending[digest] = PendingPuzzle(keys, _link(digest, pres.nym), query, now)
        return Reply("query-ok", wire.pack([record, keys.puzzle.to_bytes()]))

    def _notify(self, msg: Message) -> Reply:
        payload, digest, sol_b, pres_b = wire.unpack_exact(msg.payload, 4)
        if len(payload) > MAX_PAYLOAD:
            raise MalformedMessage("payload too large", "notify")
        pending = self.pending.get(digest)
        if pending is None:
            raise PuzzleRejected("puzzle not issued by this server or already used", "notify/21")
        pres = Presentation.from_bytes(pres_b)
        if not hmac.compare_digest(_link(digest, pres.nym), pending.link):
            raise PuzzleRejected("puzzle was issued to another pseudonym", "notify/21")
        self._verify_presentation(pres, notify_context(self.id, digest, payload, sol_b), "notify/21")
        solution = PuzzleSolution.from_bytes(sol_b)
        puzzle = pending.keys.puzzle
        if solution.m != solution_message(payload, puzzle):
            raise PuzzleRejected("solution is not bound to this payload", "notify/22")
        self.counters.modexps += 1
        if not solution_verify(pending.keys.d, puzzle.n, solution):
            raise PuzzleRejected("wrong puzzle solution", "notify/22")
        del self.pending[digest]
        if self.mode == "crn":
            token = hmac.new(self._secret, digest, hashlib.sha256).digest()
            self.grants.append(token)
            return Reply("notify-ok", token)
        if payload[:1] == b"P":
            self._populate(payload, pres, pending)
        self.notifications.append((pres.nym.to_bytes(), payload))
        return Reply("notify-ok", b"ok")

    def _populate(self, payload: bytes, pres: Presentation, pending: PendingPuzzle):
        if len(payload) < 4:
            raise MalformedMessage("short populate payload", "notify")
        available, incumbent, power = payload[1], payload[2], struct.unpack(">b", payload[3:4])[0]
        sub = Submission(pending.query, bool(available), incumbent, power * 10, pres.nym.to_bytes(), pres)
        try:
            self.store.populate(sub, lambda s: disclosed_value(s.evidence, "device-type") == "PU")
        except PopulateRejected as exc:
            raise CredentialRejected(str(exc), "populate") from None


def populate_payload(available: bool, incumbent_class: int, max_power_dbm: int) -> bytes:
    return b"P" + bytes([int(available), incumbent_class]) + struct.pack(">b", max_power_dbm)


def _link(puzzle_digest: bytes, nym: G1Point) -> bytes:
    return hashlib.sha256(b"slap/puzzle-link" + puzzle_digest + nym.to_bytes()).digest()
