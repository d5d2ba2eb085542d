"""Access-point distance estimation from RSS and round-trip time.

RSS is inverted through a log-distance path-loss model; RTT gives a
time-of-flight distance.  The two must agree within a tolerance, otherwise
the exchange is treated as relayed.  This is a stand-in model, not a
measurement of any real radio.
"""
from __future__ import annotations

import hashlib
import hmac
import math
from typing import Optional, Tuple

from pydantic import BaseModel, Field

from .dbp import C_LIGHT


class RangingInconsistency(ValueError):
    """RSS and RTT distances disagree; the link may be relayed."""


class EnvParams(BaseModel):
    model_config = {"frozen": True}

    path_loss_exponent: float = Field(2.0, ge=1.6, le=6.0)
    reference_distance_m: float = Field(1.0, gt=0)
    reference_loss_db: float = 40.0  # PL(d0)
    tx_power_dbm: float = 20.0
    shadowing_db: float = Field(0.0, ge=0)
    processing_ns: float = Field(1000.0, ge=0)
    cross_tolerance_m: float = Field(30.0, gt=0)

    def rss_at(self, distance_m: float, shadow_db: float = 0.0) -> float:
        """Received power (dBm) at `distance_m` under the model."""
        d = max(distance_m, self.reference_distance_m)
        loss = self.reference_loss_db + 10 * self.path_loss_exponent * math.log10(d / self.reference_distance_m)
        return self.tx_power_dbm - loss + shadow_db


def distance_from_rss(rss_dbm: float, env: EnvParams) -> float:
    exponent = (env.tx_power_dbm - env.reference_loss_db - rss_dbm) / (10 * env.path_loss_exponent)
    return env.reference_distance_m * 10 ** exponent


def distance_from_rtt(rtt_ns: float, env: EnvParams) -> float:
    if rtt_ns < 2 * env.processing_ns:
        raise ValueError("RTT shorter than the processing floor")
    return (rtt_ns - 2 * env.processing_ns) * 1e-9 * C_LIGHT / 2


def prox_verify(rss_dbm: float, rtt_ns: float, env: EnvParams) -> float:
    """Accepted distance estimate (the RTT distance) or RangingInconsistency."""
    d_rtt = distance_from_rtt(rtt_ns, env)
    d_rss = distance_from_rss(rss_dbm, env)
    # inside d0 the path-loss model saturates, so RSS only bounds from above
    if d_rss <= env.reference_distance_m and d_rtt <= env.reference_distance_m + env.cross_tolerance_m:
        return d_rtt
    if abs(d_rtt - d_rss) > env.cross_tolerance_m:
        raise RangingInconsistency(f"RTT distance {d_rtt:.1f} m vs RSS distance {d_rss:.1f} m")
    return d_rtt


def in_coverage(delta_m: float, claimed: Tuple[float, float], ap_position: Tuple[float, float],
                margin_m: float = 0.0) -> bool:
    """Closed-disc test: the claim lies within delta + margin of the AP."""
    return math.dist(claimed, ap_position) <= delta_m + margin_m


class BeaconClock:
    """Rotating beacon token; a client must echo the token of the current or previous window."""

    MIN_WINDOW_NS = 100_000_000
    MAX_WINDOW_NS = 500_000_000

    def __init__(self, secret: bytes, window_ns: int = 200_000_000):
        if not self.MIN_WINDOW_NS <= window_ns <= self.MAX_WINDOW_NS:
            raise ValueError("beacon window must lie in [100, 500] ms")
        self.secret = secret
        self.window_ns = window_ns

    def sequence(self, now_ns: int) -> int:
        return now_ns // self.window_ns

    def token(self, now_ns: int, sequence: Optional[int] = None) -> bytes:
        seq = self.sequence(now_ns) if sequence is None else sequence
        return hmac.new(self.secret, seq.to_bytes(8, "big"), hashlib.sha256).digest()[:16]

    def fresh(self, token: bytes, now_ns: int) -> bool:
        seq = self.sequence(now_ns)
        return any(hmac.compare_digest(token, self.token(now_ns, s)) for s in (seq, seq - 1) if s >= 0)
