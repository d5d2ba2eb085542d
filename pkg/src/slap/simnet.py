"""Deterministic discrete-event network on a 2D plane.

Events are ordered by (delivery time in ns, sequence number).  Each endpoint
has a handler that may answer a message with a reply; `Network.request`
sends a message and runs the loop until its reply arrives, so protocol code
reads sequentially while every hop is timed and traced.

Radio delivery is never earlier than straight-line propagation at the speed
of light, including paths through an interposed adversary.
"""
from __future__ import annotations

import fnmatch
import hashlib
import heapq
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .dbp import ChannelFailure, propagation_ns
from .ranging import EnvParams

DEFAULT_START_NS = 1_700_000_000 * 1_000_000_000
TAG_BYTES = 1  # each message carries a one-byte type tag ahead of its fields


class Deadlock(ChannelFailure):
    """The event queue drained while a reply was still awaited."""


class Unreachable(ChannelFailure):
    pass


@dataclass
class Endpoint:
    id: str
    x: float
    y: float
    processing_ns: int = 1000
    radio_range_m: float = 300.0
    handler: Optional[Callable[["Message"], Optional["Reply"]]] = field(default=None, repr=False)

    @property
    def position(self) -> Tuple[float, float]:
        return self.x, self.y


@dataclass(frozen=True)
class Message:
    msg_id: int
    src: str
    dst: str
    type: str
    payload: bytes
    channel: str
    sent_ns: int
    deliver_ns: int
    rss_dbm: Optional[float] = None
    reply_to: Optional[int] = None
    via: Optional[str] = None


@dataclass(frozen=True)
class Reply:
    type: str
    payload: bytes
    extra_ns: int = 0


class Adversary:
    """Base interposer: relays unchanged through its own position after `delay_ns`."""

    def __init__(self, name: str, position: Tuple[float, float], delay_ns: int = 0):
        self.name = name
        self.position = position
        self.delay_ns = delay_ns
        self.seen: List[Message] = []

    def transform(self, msg: Message) -> Optional[bytes]:
        """Payload to forward (possibly substituted); None drops the message."""
        self.seen.append(msg)
        return msg.payload

    def extra_delay_ns(self, msg: Message) -> int:
        return self.delay_ns


class Network:
    def __init__(self, seed: int = 0, env: Optional[EnvParams] = None,
                 wired_latency_ns: int = 2_000_000, jitter_ns: int = 0,
                 start_ns: int = DEFAULT_START_NS, capture: bool = False):
        self.rng = random.Random(seed)
        self.env = env or EnvParams()
        self.wired_latency_ns = wired_latency_ns
        self.jitter_ns = jitter_ns
        self.now_ns = start_ns
        self.endpoints: Dict[str, Endpoint] = {}
        self._queue: List[Tuple[int, int, Optional[Message]]] = []
        self._seq = itertools.count()
        self._ids = itertools.count(1)
        self._replies: Dict[int, Message] = {}
        self._awaiting: set = set()
        self._hooks: List[Tuple[str, str, Optional[str], Adversary]] = []
        self.trace: List[dict] = []
        self.capture = capture
        self.captured: List[Tuple[str, bytes]] = []  # (type, payload) per delivered message
        self.floor_clamps = 0
        # message types answered by dedicated hardware with no software turnaround
        self.type_processing_ns: Dict[str, int] = {"dbp-challenge": 0, "dbp-response": 0}

    # -- topology ------------------------------------------------------------

    def add(self, endpoint: Endpoint) -> Endpoint:
        if endpoint.id in self.endpoints:
            raise ValueError(f"duplicate endpoint {endpoint.id!r}")
        self.endpoints[endpoint.id] = endpoint
        return endpoint

    def attach(self, endpoint_id: str, handler: Callable[[Message], Optional[Reply]]):
        self.endpoints[endpoint_id].handler = handler

    def distance(self, a: str, b: str) -> float:
        return math.dist(self.endpoints[a].position, self.endpoints[b].position)

    def interpose(self, adversary: Adversary, src: str = "*", dst: str = "*",
                  channel: Optional[str] = "radio"):
        for pattern in (src, dst):
            if pattern != "*" and not fnmatch.filter(self.endpoints, pattern):
                raise ValueError(f"pattern {pattern!r} matches no endpoint")
        self._hooks.append((src, dst, channel, adversary))

    def _hook_for(self, src: str, dst: str, channel: str) -> Optional[Adversary]:
        for s, d, ch, adv in self._hooks:
            if fnmatch.fnmatch(src, s) and fnmatch.fnmatch(dst, d) and (ch is None or ch == channel):
                return adv
        return None

    # -- sending -------------------------------------------------------------

    def send(self, src: str, dst: str, type: str, payload: bytes, channel: str = "radio",
             reply_to: Optional[int] = None, extra_ns: int = 0) -> Optional[Message]:
        if channel not in ("radio", "wired"):
            raise ValueError(f"unknown channel {channel!r}")
        s, d = self.endpoints[src], self.endpoints[dst]
        sent = self.now_ns
        depart = sent + self.type_processing_ns.get(type, s.processing_ns) + extra_ns
        jitter = self.rng.randrange(self.jitter_ns + 1) if self.jitter_ns else 0
        msg_id = next(self._ids)
        adversary = self._hook_for(src, dst, channel)
        transmitter = s.position
        if adversary is None:
            dist = math.dist(s.position, d.position)
            if channel == "radio" and dist > min(s.radio_range_m, d.radio_range_m):
                self._record(sent, src, dst, type, len(payload), channel, dropped=True)
                return None
            floor = propagation_ns(dist)
            delay = floor + (self.wired_latency_ns if channel == "wired" else 0)
        else:
            floor = propagation_ns(math.dist(s.position, adversary.position)
                                   + math.dist(adversary.position, d.position))
            probe = Message(msg_id, src, dst, type, payload, channel, sent, 0, via=adversary.name)
            new_payload = adversary.transform(probe)
            if new_payload is None:
                self._record(sent, src, dst, type, len(payload), channel, dropped=True)
                return None
            payload = new_payload
            delay = floor + adversary.extra_delay_ns(probe) + (self.wired_latency_ns if channel == "wired" else 0)
            if delay < floor:
                self.floor_clamps += 1
                delay = floor
            transmitter = adversary.position
        deliver = depart + math.ceil(delay) + jitter
        rss = None
        if channel == "radio":
            shadow = self.rng.gauss(0.0, self.env.shadowing_db) if self.env.shadowing_db else 0.0
            rss = self.env.rss_at(math.dist(transmitter, d.position), shadow)
        msg = Message(msg_id, src, dst, type, payload, channel, sent, deliver, rss, reply_to,
                      adversary.name if adversary else None)
        heapq.heappush(self._queue, (deliver, next(self._seq), msg))
        return msg

    def request(self, src: str, dst: str, type: str, payload: bytes,
                channel: str = "radio", extra_ns: int = 0) -> Message:
        msg = self.send(src, dst, type, payload, channel, extra_ns=extra_ns)
        if msg is None:
            raise Unreachable(f"{dst} is not reachable from {src} over {channel}")
        self._awaiting.add(msg.msg_id)
        try:
            while msg.msg_id not in self._replies:
                if not self._step():
                    raise Deadlock(f"no reply to {type!r} from {dst}; event queue drained")
            return self._replies.pop(msg.msg_id)
        finally:
            self._awaiting.discard(msg.msg_id)

    def sleep(self, duration_ns: int):
        wake = self.now_ns + duration_ns
        heapq.heappush(self._queue, (wake, next(self._seq), None))
        while self.now_ns < wake:
            if not self._step():
                break
        self.now_ns = max(self.now_ns, wake)

    def run(self):
        while self._step():
            pass

    # -- loop ----------------------------------------------------------------

    def _step(self) -> bool:
        if not self._queue:
            return False
        deliver, _, msg = heapq.heappop(self._queue)
        if deliver < self.now_ns:
            raise RuntimeError("clock went backwards")
        self.now_ns = deliver
        if msg is None:
            return True
        self._record(deliver, msg.src, msg.dst, msg.type, len(msg.payload), msg.channel)
        if self.capture:
            self.captured.append((msg.type, msg.payload))
        if msg.reply_to is not None and msg.reply_to in self._awaiting:
            self._replies[msg.reply_to] = msg
            return True
        handler = self.endpoints[msg.dst].handler
        if handler is None:
            return True
        reply = handler(msg)
        if reply is not None:
            self.send(msg.dst, msg.src, reply.type, reply.payload, msg.channel,
                      reply_to=msg.msg_id, extra_ns=reply.extra_ns)
        return True

    # -- trace ---------------------------------------------------------------

    def _record(self, t: int, src: str, dst: str, type: str, size: int, channel: str,
                dropped: bool = False):
        rec = {"time": t, "src": src, "dst": dst, "type": type, "size": TAG_BYTES + size,
               "channel": channel}
        if dropped:
            rec["dropped"] = True
        self.trace.append(rec)

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.trace)

    def trace_digest(self) -> str:
        return hashlib.sha256(self.trace_jsonl().encode()).hexdigest()
