"""Per-toy runtime: one pure state transition per 100 ms tick.

A tick ingests what the radio delivered, classifies completed sensor windows,
sends changed summaries to the paired toy, advertises on interval boundaries
and logs everything it did. ``tick`` never mutates its input state, so the
same inputs always give the same ``(state, output)`` pair.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .core_model import DeviceProfile, SensorKind, ToyKind, make_profile, validate_event, validate_feedback
from .errors import CapabilityError, ClockError, PairingError, ValidationError
from .feedback import (
    DEFAULT_POLICY,
    LED_OFF,
    FeedbackCommand,
    FeedbackPolicy,
    LedColor,
    map_partner_feedback,
    map_presence_feedback,
)
from .interaction_log import LogRecord, RecordKind, summary_payload, window_payload
from .radio import (
    Advertisement,
    DataFrame,
    NeighborEntry,
    Position,
    RadioConfig,
    Transmission,
    prune_neighbors,
    update_neighbors,
)
from .sensing import (
    ClassifierThresholds,
    InteractionSummary,
    MotionWindow,
    TouchWindow,
    VitalsSample,
    classify_window,
)

TICK_MS = 100
KEEPALIVE_WINDOWS = 10

InboxItem = tuple[Transmission, float]


@dataclass(frozen=True)
class PendingWindow:
    motion: MotionWindow
    touch: TouchWindow
    vitals: Optional[VitalsSample] = None
    baseline_hr: Optional[float] = None


@dataclass(frozen=True)
class DeviceState:
    profile: DeviceProfile
    position: Position
    pair_id: Optional[str] = None
    neighbor_table: Mapping[str, NeighborEntry] = field(default_factory=dict)
    last_summary: Optional[InteractionSummary] = None
    adv_seq: int = 0
    pending_sensor_windows: tuple[PendingWindow, ...] = ()
    clock_ms: int = 0
    windows_since_tx: int = 0
    latest_vitals: Optional[VitalsSample] = None
    baseline_hr: Optional[float] = None
    led: LedColor = LED_OFF
    led_until_ms: int = 0

    @property
    def device_id(self) -> str:
        return self.profile.device_id


@dataclass(frozen=True)
class TickOutput:
    outgoing: tuple[Transmission, ...] = ()
    feedback: tuple[FeedbackCommand, ...] = ()
    log_records: tuple[LogRecord, ...] = ()
    classified: tuple[InteractionSummary, ...] = ()


def new_device(kind: ToyKind, device_id: str, position: Position) -> DeviceState:
    return DeviceState(make_profile(kind, device_id), position)


def pair_devices(a: DeviceState, b: DeviceState) -> tuple[DeviceState, DeviceState]:
    if a.device_id == b.device_id:
        raise PairingError(f"cannot pair {a.device_id!r} with itself")
    for s in (a, b):
        if s.pair_id is not None:
            raise PairingError(f"{s.device_id!r} is already paired with {s.pair_id!r}")
    return (
        dataclasses.replace(a, pair_id=b.device_id),
        dataclasses.replace(b, pair_id=a.device_id),
    )


def observe_vitals(state: DeviceState, sample: VitalsSample) -> DeviceState:
    """Record a heart-rate reading. The first reading becomes the resting baseline."""
    validate_event(state.profile, SensorKind.HEART_RATE)
    if sample.eda_microsiemens is not None:
        validate_event(state.profile, SensorKind.EDA)
    baseline = state.baseline_hr if state.baseline_hr is not None else sample.heart_rate_bpm
    return dataclasses.replace(state, latest_vitals=sample, baseline_hr=baseline)


def ingest_sensor_window(
    state: DeviceState,
    motion: MotionWindow,
    touch: TouchWindow,
    vitals: Optional[VitalsSample] = None,
) -> DeviceState:
    validate_event(state.profile, SensorKind.IMU_9DOF)
    validate_event(state.profile, SensorKind.CAPACITIVE_TOUCH)
    if vitals is not None:
        state = observe_vitals(state, vitals)
    window = PendingWindow(motion, touch, state.latest_vitals, state.baseline_hr)
    return dataclasses.replace(state, pending_sensor_windows=state.pending_sensor_windows + (window,))


def led_at(state: DeviceState, now_ms: int) -> LedColor:
    return state.led if now_ms < state.led_until_ms else LED_OFF


def feedback_payload(cmd: FeedbackCommand) -> dict[str, str]:
    h = cmd.haptic
    return {
        "amp": repr(float(h.amplitude)),
        "cause": cmd.cause.value,
        "gap": str(h.gap_ms),
        "led": str(cmd.led),
        "pattern": h.pattern_id.value,
        "pulse": str(h.pulse_ms),
        "reps": str(h.repetitions),
    }


def tick(
    state: DeviceState,
    now_ms: int,
    inbox: Sequence[InboxItem] = (),
    policy: FeedbackPolicy = DEFAULT_POLICY,
    cfg: RadioConfig = RadioConfig(),
    th: ClassifierThresholds = ClassifierThresholds(),
) -> tuple[DeviceState, TickOutput]:
    me = state.device_id
    if now_ms < state.clock_ms:
        raise ClockError(f"{me}: tick at {now_ms} ms is before device clock {state.clock_ms} ms")

    records: list[LogRecord] = []
    feedback: list[FeedbackCommand] = []
    outgoing: list[Transmission] = []
    classified: list[InteractionSummary] = []
    led, led_until = state.led, state.led_until_ms

    def log(kind, **payload):
        records.append(LogRecord(now_ms, me, kind, payload))

    def actuate(cmd):
        nonlocal led, led_until
        if cmd is None:
            return
        try:
            cmd = validate_feedback(state.profile, cmd)
        except CapabilityError:
            return
        feedback.append(cmd)
        log(RecordKind.FEEDBACK, **feedback_payload(cmd))
        if cmd.led != LED_OFF:
            led, led_until = cmd.led, now_ms + policy.led_hold_ms

    # (1) inbox
    neighbors = dict(state.neighbor_table)
    prev_count = len(neighbors)
    for item, rssi in inbox:
        if item.sender_id == me:
            raise ValidationError(f"{me}: inbox holds its own transmission")
        if isinstance(item, Advertisement):
            extra = {"affect": item.affect.value} if item.affect is not None else {}
            log(RecordKind.RX_ADV, **{"from": item.sender_id, "seq": str(item.seq), "rssi": repr(rssi)}, **extra)
            neighbors = update_neighbors(neighbors, item, rssi, now_ms)
        else:
            if item.receiver_id != me:
                raise ValidationError(f"{me}: inbox holds a frame for {item.receiver_id!r}")
            if item.sender_id != state.pair_id:
                raise ValidationError(f"{me}: data frame from unpaired {item.sender_id!r}")
            log(
                RecordKind.RX_DATA,
                **{"from": item.sender_id, "rssi": repr(rssi), "sent": str(item.t_ms)},
                **summary_payload(item.payload),
            )
            actuate(map_partner_feedback(item.payload, policy, t_ms=now_ms))
    neighbors = prune_neighbors(neighbors, now_ms, cfg.neighbor_ttl_ms)
    count = len(neighbors)
    if count != prev_count:
        log(RecordKind.NEIGHBOR_CHANGE, count=str(count), prev=str(prev_count))
        actuate(map_presence_feedback(count, prev_count, policy, t_ms=now_ms))

    # (2) + (3) classification and paired transmission
    last = state.last_summary
    since_tx = state.windows_since_tx
    for w in state.pending_sensor_windows:
        summary = classify_window(me, now_ms, w.motion, w.touch, w.vitals, w.baseline_hr, th)
        log(RecordKind.SENSOR_WINDOW, **window_payload(w.motion, w.touch, w.vitals, w.baseline_hr))
        log(RecordKind.CLASSIFICATION, **summary_payload(summary))
        classified.append(summary)
        changed = last is None or last.classes() != summary.classes()
        last = summary
        since_tx += 1
        if state.pair_id is not None and (changed or since_tx >= KEEPALIVE_WINDOWS):
            outgoing.append(DataFrame(me, state.pair_id, now_ms, summary))
            log(RecordKind.TX_DATA, to=state.pair_id, **summary_payload(summary))
            since_tx = 0

    # (4) advertising
    adv_seq = state.adv_seq
    if now_ms % cfg.adv_interval_ms == 0:
        adv_seq += 1
        affect = last.affect if last is not None else None
        outgoing.append(Advertisement(me, adv_seq, now_ms, affect))
        extra = {"affect": affect.value} if affect is not None else {}
        log(
            RecordKind.TX_ADV,
            seq=str(adv_seq),
            x=repr(float(state.position.x)),
            y=repr(float(state.position.y)),
            **extra,
        )

    new_state = dataclasses.replace(
        state,
        neighbor_table=neighbors,
        last_summary=last,
        adv_seq=adv_seq,
        pending_sensor_windows=(),
        clock_ms=now_ms,
        windows_since_tx=since_tx,
        led=led,
        led_until_ms=led_until,
    )
    return new_state, TickOutput(tuple(outgoing), tuple(feedback), tuple(records), tuple(classified))
