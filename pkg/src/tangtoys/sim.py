"""Deterministic discrete-time simulation of a group of toys.

Time advances in 100 ms ticks. Each tick applies scripted events, hands
completed sensor windows to their toys, ticks every toy in ascending id order
and then routes the toys' transmissions through the radio medium into the next
tick's inboxes. That one-tick store-and-forward is the latency model.
"""

from __future__ import annotations

import dataclasses
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .errors import ConfigError
from .feedback import DEFAULT_POLICY, FeedbackCause, FeedbackPolicy
from .interaction_log import (
    MEDIUM_ID,
    InteractionLog,
    LogRecord,
    RecordKind,
    parse,
    serialize,
    summary_from_record,
)
from .radio import Advertisement, DataFrame, Position, RadioConfig, deliver, distance
from .runtime import (
    TICK_MS,
    DeviceState,
    ingest_sensor_window,
    new_device,
    observe_vitals,
    pair_devices,
    tick,
)
from .scenario import MoveEvent, Scenario, ShakeEvent, TouchEvent, VitalsEvent, synthesize_shake, synthesize_touch
from .sensing import ClassifierThresholds, VitalsSample


@dataclass
class Trace:
    """All device records plus medium deliveries, sorted by (t_ms, device_id, kind)."""

    records: list[LogRecord]

    def to_text(self) -> str:
        return serialize(self.records)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "Trace":
        return cls(parse(text))

    @classmethod
    def load(cls, path) -> "Trace":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


@dataclass
class Stats:
    """Per-device counters and timelines. Zero counts are never stored."""

    tx_adv: Counter = field(default_factory=Counter)
    rx_adv: Counter = field(default_factory=Counter)
    tx_data: Counter = field(default_factory=Counter)
    rx_data: Counter = field(default_factory=Counter)
    feedback: dict = field(default_factory=lambda: defaultdict(Counter))
    affect_timeline: dict = field(default_factory=lambda: defaultdict(list))
    neighbor_timeline: dict = field(default_factory=lambda: defaultdict(list))

    def deliveries(self, device_id: str) -> int:
        return self.rx_adv[device_id] + self.rx_data[device_id]

    def devices(self) -> list[str]:
        ids = set()
        for c in (self.tx_adv, self.rx_adv, self.tx_data, self.rx_data):
            ids.update(c)
        ids.update(self.feedback, self.affect_timeline, self.neighbor_timeline)
        return sorted(ids)

    def _plain(self):
        return (
            {k: v for k, v in self.tx_adv.items() if v},
            {k: v for k, v in self.rx_adv.items() if v},
            {k: v for k, v in self.tx_data.items() if v},
            {k: v for k, v in self.rx_data.items() if v},
            {d: {c: n for c, n in cs.items() if n} for d, cs in self.feedback.items() if any(cs.values())},
            {d: list(t) for d, t in self.affect_timeline.items() if t},
            {d: list(t) for d, t in self.neighbor_timeline.items() if t},
        )

    def __eq__(self, other):
        if not isinstance(other, Stats):
            return NotImplemented
        return self._plain() == other._plain()

    def rows(self, device_id: Optional[str] = None) -> list[dict]:
        out = []
        for d in self.devices():
            if device_id is not None and d != device_id:
                continue
            fb = self.feedback.get(d, Counter())
            affects = self.affect_timeline.get(d, [])
            nbrs = self.neighbor_timeline.get(d, [])
            out.append(
                {
                    "device": d,
                    "tx_adv": self.tx_adv[d],
                    "rx_adv": self.rx_adv[d],
                    "tx_data": self.tx_data[d],
                    "rx_data": self.rx_data[d],
                    "feedback_partner": fb[FeedbackCause.PARTNER_INTERACTION],
                    "feedback_presence": fb[FeedbackCause.PRESENCE],
                    "classifications": len(affects),
                    "last_affect": affects[-1][1].value if affects else "",
                    "last_neighbor_count": nbrs[-1][1] if nbrs else 0,
                }
            )
        return out


@dataclass
class SimResult:
    trace: Trace
    stats: Stats
    logs: dict[str, InteractionLog]
    states: dict[str, DeviceState]


def _initial_states(scenario: Scenario) -> dict[str, DeviceState]:
    states = {d.device_id: new_device(d.kind, d.device_id, d.position) for d in scenario.devices}
    for a, b in scenario.pairs:
        states[a], states[b] = pair_devices(states[a], states[b])
    return states


def run(
    scenario: Scenario,
    cfg: RadioConfig = RadioConfig(),
    th: ClassifierThresholds = ClassifierThresholds(),
    policy: FeedbackPolicy = DEFAULT_POLICY,
) -> SimResult:
    if cfg.adv_interval_ms % TICK_MS:
        raise ConfigError(f"adv_interval_ms must be a multiple of {TICK_MS} ms")

    states = _initial_states(scenario)
    ids = sorted(states)
    logs = {d: InteractionLog() for d in ids}
    medium = InteractionLog()
    live = Stats()
    rng = random.Random(cfg.rng_seed)

    events = sorted(enumerate(scenario.events), key=lambda p: (p[1].t_ms, p[0]))
    next_event = 0
    in_flight: list[tuple[int, int, str, object, object]] = []  # (ready, order, dev, motion, touch)
    order = 0
    inboxes: dict[str, list] = {d: [] for d in ids}

    for now in range(0, scenario.end_ms + 1, TICK_MS):
        while next_event < len(events) and events[next_event][1].t_ms <= now:
            ev = events[next_event][1]
            next_event += 1
            s = states[ev.device_id]
            if isinstance(ev, MoveEvent):
                states[ev.device_id] = dataclasses.replace(s, position=ev.position)
            elif isinstance(ev, VitalsEvent):
                states[ev.device_id] = observe_vitals(s, VitalsSample(ev.t_ms, ev.hr_bpm))
            else:
                synth = synthesize_shake if isinstance(ev, ShakeEvent) else synthesize_touch
                motion, touch, ready = synth(ev)
                in_flight.append((ready, order, ev.device_id, motion, touch))
                order += 1

        in_flight.sort(key=lambda w: (w[0], w[1]))
        while in_flight and in_flight[0][0] <= now:
            _, _, dev, motion, touch = in_flight.pop(0)
            states[dev] = ingest_sensor_window(states[dev], motion, touch)

        outboxes = {}
        for d in ids:
            before = len(states[d].neighbor_table)
            inbox = inboxes[d]
            states[d], out = tick(states[d], now, inbox, policy, cfg, th)
            for r in out.log_records:
                logs[d].append(r)
            outboxes[d] = out.outgoing
            live.rx_adv[d] += sum(isinstance(i, Advertisement) for i, _ in inbox)
            live.rx_data[d] += sum(isinstance(i, DataFrame) for i, _ in inbox)
            live.tx_adv[d] += sum(isinstance(i, Advertisement) for i in out.outgoing)
            live.tx_data[d] += sum(isinstance(i, DataFrame) for i in out.outgoing)
            for cmd in out.feedback:
                live.feedback[d][cmd.cause] += 1
            for s in out.classified:
                live.affect_timeline[d].append((s.t_ms, s.affect))
            after = len(states[d].neighbor_table)
            if after != before:
                live.neighbor_timeline[d].append((now, after))

        positions = {d: states[d].position for d in ids}
        inboxes = {d: [] for d in ids}
        for sender in ids:
            for item in outboxes[sender]:
                kind = "ADV" if isinstance(item, Advertisement) else "DAT"
                for receiver, rssi in deliver(item, positions, cfg, rng):
                    inboxes[receiver].append((item, rssi))
                    medium.append(
                        LogRecord(
                            now,
                            MEDIUM_ID,
                            RecordKind.DELIVER,
                            {"from": sender, "to": receiver, "kind": kind, "rssi": repr(rssi)},
                        )
                    )

    merged = [r for d in ids for r in logs[d].records] + medium.records
    merged.sort(key=LogRecord.sort_key)
    return SimResult(Trace(merged), live, logs, states)


def _records(trace: Union[Trace, str, Sequence[LogRecord]]) -> Sequence[LogRecord]:
    if isinstance(trace, Trace):
        return trace.records
    if isinstance(trace, str):
        return parse(trace)
    return trace


def analyze(trace: Union[Trace, str, Sequence[LogRecord]]) -> Stats:
    """Recompute run statistics from trace records alone."""
    stats = Stats()
    for r in _records(trace):
        d = r.device_id
        k = r.kind
        if k is RecordKind.TX_ADV:
            stats.tx_adv[d] += 1
        elif k is RecordKind.RX_ADV:
            stats.rx_adv[d] += 1
        elif k is RecordKind.TX_DATA:
            stats.tx_data[d] += 1
        elif k is RecordKind.RX_DATA:
            stats.rx_data[d] += 1
        elif k is RecordKind.FEEDBACK:
            stats.feedback[d][FeedbackCause(r.payload["cause"])] += 1
        elif k is RecordKind.CLASSIFICATION:
            stats.affect_timeline[d].append((r.t_ms, summary_from_record(r).affect))
        elif k is RecordKind.NEIGHBOR_CHANGE:
            stats.neighbor_timeline[d].append((r.t_ms, int(r.payload["count"])))
    return stats


def check_conservation(
    trace: Union[Trace, str, Sequence[LogRecord]],
    range_m: Optional[float] = None,
) -> list[str]:
    """Check delivery bookkeeping using only the trace; returns violations.

    Every RxData must consume a distinct earlier TxData with the same sender,
    receiver and classes, and every Rx must have a medium Deliver line from the
    previous tick. No advertisement may be heard more often than there are
    other devices. With ``range_m`` given (and a loss-free run) each
    advertisement must be heard by exactly the devices whose advertised
    positions at that instant lie within range.
    """
    records = list(_records(trace))
    problems: list[str] = []
    devices = sorted({r.device_id for r in records if r.device_id != MEDIUM_ID})
    last_t = max((r.t_ms for r in records), default=0)

    tx_data: Counter = Counter()
    tx_adv: dict[tuple[str, int], LogRecord] = {}
    adv_at: dict[int, list[LogRecord]] = defaultdict(list)
    delivered: Counter = Counter()
    rx_adv: Counter = Counter()

    for r in records:
        p = r.payload
        if r.kind is RecordKind.TX_DATA:
            tx_data[(r.device_id, p["to"], r.t_ms, p["motion"], p["touch"], p["affect"])] += 1
        elif r.kind is RecordKind.TX_ADV:
            tx_adv[(r.device_id, int(p["seq"]))] = r
            adv_at[r.t_ms].append(r)
        elif r.kind is RecordKind.DELIVER:
            delivered[(r.t_ms, p["from"], p["to"], p["kind"])] += 1

    for r in records:
        p = r.payload
        if r.kind is RecordKind.RX_DATA:
            key = (p["from"], r.device_id, int(p["sent"]), p["motion"], p["touch"], p["affect"])
            if key[2] > r.t_ms or tx_data[key] <= 0:
                problems.append(f"RxData at {r.t_ms} on {r.device_id} has no matching TxData")
            else:
                tx_data[key] -= 1
            dkey = (r.t_ms - TICK_MS, p["from"], r.device_id, "DAT")
        elif r.kind is RecordKind.RX_ADV:
            src = (p["from"], int(p["seq"]))
            rx_adv[src] += 1
            if src not in tx_adv:
                problems.append(f"RxAdv at {r.t_ms} on {r.device_id} for unknown advertisement {src}")
            dkey = (r.t_ms - TICK_MS, p["from"], r.device_id, "ADV")
        else:
            continue
        if delivered[dkey] <= 0:
            problems.append(f"{r.kind.value} at {r.t_ms} on {r.device_id} has no Deliver line")
        else:
            delivered[dkey] -= 1

    for src, n in rx_adv.items():
        if n > len(devices) - 1:
            problems.append(f"advertisement {src} heard {n} times with {len(devices)} devices")

    if range_m is not None:
        for (sender, seq), r in tx_adv.items():
            if r.t_ms == last_t:
                continue  # routed after the last tick, never received
            here = Position(float(r.payload["x"]), float(r.payload["y"]))
            expected = sum(
                1
                for o in adv_at[r.t_ms]
                if o.device_id != sender
                and distance(here, Position(float(o.payload["x"]), float(o.payload["y"]))) <= range_m
            )
            if rx_adv[(sender, seq)] != expected:
                problems.append(
                    f"advertisement {sender}#{seq} heard {rx_adv[(sender, seq)]} times, expected {expected}"
                )
    return problems


def run_text(scenario_text: str, **kwargs) -> SimResult:
    from .scenario import parse_scenario

    return run(parse_scenario(scenario_text), **kwargs)


def iter_kind(records: Iterable[LogRecord], kind: RecordKind, device_id: Optional[str] = None):
    for r in records:
        if r.kind is kind and (device_id is None or r.device_id == device_id):
            yield r
