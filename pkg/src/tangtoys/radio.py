"""Simulated short-range radio: disc propagation, RSSI, advertisements and paired frames."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .errors import ConfigError, ParseError, RegistrationError
from .sensing import AffectState, InteractionSummary, MotionClass, TouchClass

RSSI_AT_1M_DBM = -40.0
PATH_LOSS_EXPONENT = 2.0
MIN_DISTANCE_M = 0.1


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigError("position must be finite")


@dataclass(frozen=True)
class RadioConfig:
    range_m: float = 50.0
    adv_interval_ms: int = 1000
    loss_prob: float = 0.0
    neighbor_ttl_ms: int = 5000
    rng_seed: int = 0

    def __post_init__(self):
        if not self.range_m > 0:
            raise ConfigError("range_m must be positive")
        if not self.adv_interval_ms > 0:
            raise ConfigError("adv_interval_ms must be positive")
        if not 0.0 <= self.loss_prob < 1.0:
            raise ConfigError("loss_prob must lie in [0, 1)")
        if self.neighbor_ttl_ms < 0:
            raise ConfigError("neighbor_ttl_ms must be non-negative")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError("rng_seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class Advertisement:
    sender_id: str
    seq: int
    t_ms: int
    affect: Optional[AffectState] = None


@dataclass(frozen=True)
class DataFrame:
    sender_id: str
    receiver_id: str
    t_ms: int
    payload: InteractionSummary


Transmission = Union[Advertisement, DataFrame]


@dataclass(frozen=True)
class NeighborEntry:
    neighbor_id: str
    last_seen_ms: int
    rssi_dbm: float


def distance(a: Position, b: Position) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def in_range(a: Position, b: Position, range_m: float) -> bool:
    return distance(a, b) <= range_m


def rssi_model(distance_m: float) -> float:
    """Log-distance path loss with a 0.1 m floor."""
    if distance_m < 0:
        raise ValueError("distance must be non-negative")
    return RSSI_AT_1M_DBM - 10.0 * PATH_LOSS_EXPONENT * math.log10(max(distance_m, MIN_DISTANCE_M))


def deliver(
    item: Transmission,
    positions: Mapping[str, Position],
    cfg: RadioConfig,
    rng: random.Random,
) -> list[tuple[str, float]]:
    """Receivers of ``item`` with their RSSI, sorted by receiver id.

    One uniform draw is taken for every in-range candidate, in receiver-id
    order, whatever ``loss_prob`` is; callers feed items in sender-id order so
    the stream is consumed identically on every run.
    """
    sender = item.sender_id
    if sender not in positions:
        raise RegistrationError(f"sender {sender!r} has no registered position")
    if isinstance(item, DataFrame):
        if item.receiver_id not in positions:
            raise RegistrationError(f"receiver {item.receiver_id!r} has no registered position")
        candidates = [item.receiver_id]
    else:
        candidates = sorted(d for d in positions if d != sender)
    src = positions[sender]
    out = []
    for rid in candidates:
        d = distance(src, positions[rid])
        if d > cfg.range_m:
            continue
        if rng.random() < cfg.loss_prob:
            continue
        out.append((rid, rssi_model(d)))
    return out


def update_neighbors(
    table: Mapping[str, NeighborEntry], adv: Advertisement, rssi: float, now: int
) -> dict[str, NeighborEntry]:
    out = dict(table)
    out[adv.sender_id] = NeighborEntry(adv.sender_id, int(now), float(rssi))
    return out


def prune_neighbors(table: Mapping[str, NeighborEntry], now: int, ttl_ms: int) -> dict[str, NeighborEntry]:
    return {k: e for k, e in table.items() if now - e.last_seen_ms <= ttl_ms}


# -- wire encodings ----------------------------------------------------------


def encode(item: Transmission) -> str:
    if isinstance(item, Advertisement):
        affect = item.affect.value if item.affect is not None else ""
        return f"ADV,{item.sender_id},{item.seq},{item.t_ms},{affect}"
    p = item.payload
    return f"DAT,{item.sender_id},{item.receiver_id},{item.t_ms},{p.motion.value},{p.touch.value},{p.affect.value}"


def decode(line: str) -> Transmission:
    """Inverse of :func:`encode`. A DataFrame's summary takes the frame's sender and time."""
    fields = line.strip().split(",")
    try:
        if fields[0] == "ADV" and len(fields) == 5:
            affect = AffectState(fields[4]) if fields[4] else None
            return Advertisement(fields[1], int(fields[2]), int(fields[3]), affect)
        if fields[0] == "DAT" and len(fields) == 7:
            t = int(fields[3])
            summary = InteractionSummary(
                fields[1], t, MotionClass(fields[4]), TouchClass(fields[5]), AffectState(fields[6])
            )
            return DataFrame(fields[1], fields[2], t, summary)
    except ValueError as exc:
        raise ParseError(f"bad wire frame {line!r}: {exc}") from None
    raise ParseError(f"bad wire frame {line!r}")
