"""Append-only interaction log, the simulated SD card.

One record per line: ``t_ms,device_id,kind,k1=v1;k2=v2`` with payload keys
sorted. The characters ``,`` ``;`` ``=`` are separators and may not appear in
ids, keys or values. Sensor windows are logged with their raw samples so a
log can be re-classified offline and compared with what the toy decided.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import OrderingError, ParseError, ReplayGapError, ValidationError
from .sensing import (
    AffectState,
    ClassifierThresholds,
    InteractionSummary,
    MotionClass,
    MotionWindow,
    TouchClass,
    TouchWindow,
    VitalsSample,
    classify_window,
)

HEADER = "tangtoys-log,v1"
MEDIUM_ID = "MED"
_RESERVED = frozenset(",;=\n\r")


class RecordKind(str, enum.Enum):
    # declared in the order a tick produces them; traces sort on this order
    RX_ADV = "RxAdv"
    RX_DATA = "RxData"
    NEIGHBOR_CHANGE = "NeighborChange"
    FEEDBACK = "Feedback"
    SENSOR_WINDOW = "SensorWindow"
    CLASSIFICATION = "Classification"
    TX_DATA = "TxData"
    TX_ADV = "TxAdv"
    # medium delivery lines, only valid with device id MED
    DELIVER = "Deliver"

    @property
    def order(self) -> int:
        return _KIND_ORDER[self]


_KIND_ORDER = {k: i for i, k in enumerate(RecordKind)}
_KIND_BY_NAME = {k.value: k for k in RecordKind}


@dataclass(frozen=True)
class LogRecord:
    t_ms: int
    device_id: str
    kind: RecordKind
    payload: Mapping[str, str] = field(default_factory=dict)

    def sort_key(self):
        return (self.t_ms, self.device_id, self.kind.order)


def _check_token(what: str, text: str, allow_empty=False) -> None:
    if not isinstance(text, str):
        raise ValidationError(f"{what} must be a string, got {type(text).__name__}")
    if not text and not allow_empty:
        raise ValidationError(f"{what} must not be empty")
    bad = _RESERVED.intersection(text)
    if bad:
        raise ValidationError(f"{what} {text!r} contains reserved character {sorted(bad)[0]!r}")


def format_record(record: LogRecord) -> str:
    if not isinstance(record.t_ms, int) or record.t_ms < 0:
        raise ValidationError(f"t_ms must be a non-negative int, got {record.t_ms!r}")
    _check_token("device id", record.device_id)
    if (record.kind is RecordKind.DELIVER) != (record.device_id == MEDIUM_ID):
        raise ValidationError("Deliver records belong to the medium and only to it")
    items = []
    for k in sorted(record.payload):
        v = record.payload[k]
        _check_token("payload key", k)
        _check_token(f"value of {k!r}", v, allow_empty=True)
        items.append(f"{k}={v}")
    return f"{record.t_ms},{record.device_id},{record.kind.value},{';'.join(items)}"


class InteractionLog:
    """Append-only record sequence, enforcing per-device time order."""

    def __init__(self, records: Iterable[LogRecord] = ()):
        self.records: list[LogRecord] = []
        self._lines: list[str] = []
        self._last: dict[str, int] = {}
        for r in records:
            self.append(r)

    def append(self, record: LogRecord) -> "InteractionLog":
        last = self._last.get(record.device_id)
        if last is not None and record.t_ms < last:
            raise OrderingError(
                f"{record.device_id}: record at {record.t_ms} ms after one at {last} ms"
            )
        line = format_record(record)
        self.records.append(record)
        self._last[record.device_id] = record.t_ms
        self._lines.append(line)
        return self

    def __len__(self):
        return len(self.records)

    def to_text(self) -> str:
        return HEADER + "\n" + "".join(line + "\n" for line in self._lines)

    def write(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8", newline="\n")


def serialize(records: Sequence[LogRecord]) -> str:
    return HEADER + "\n" + "".join(format_record(r) + "\n" for r in records)


def parse(text: str) -> list[LogRecord]:
    """Parse a log or trace file. Repeated header lines are allowed, so
    concatenated files parse as the concatenation of their records."""
    records: list[LogRecord] = []
    last: dict[str, int] = {}
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r")
        if line == HEADER:
            continue
        if lineno == 1:
            raise ParseError(f"expected header {HEADER!r}", line=1, column=1)
        rec = _parse_line(line, lineno)
        prev = last.get(rec.device_id)
        if prev is not None and rec.t_ms < prev:
            raise ParseError(f"time goes backwards for {rec.device_id}", line=lineno, column=1)
        last[rec.device_id] = rec.t_ms
        records.append(rec)
    return records


def _parse_line(line: str, lineno: int) -> LogRecord:
    parts = line.split(",")
    if len(parts) != 4:
        col = len(line) + 1 if len(parts) < 4 else len(",".join(parts[:4])) + 1
        raise ParseError(f"expected 4 comma-separated fields, got {len(parts)}", line=lineno, column=col)
    t_text, dev, kind_text, payload_text = parts
    if not t_text.isdigit():
        raise ParseError(f"bad timestamp {t_text!r}", line=lineno, column=1)
    col_dev = len(t_text) + 2
    if not dev:
        raise ParseError("empty device id", line=lineno, column=col_dev)
    col_kind = col_dev + len(dev) + 1
    kind = _KIND_BY_NAME.get(kind_text)
    if kind is None:
        raise ParseError(f"unknown record kind {kind_text!r}", line=lineno, column=col_kind)
    if (kind is RecordKind.DELIVER) != (dev == MEDIUM_ID):
        raise ParseError(f"kind {kind_text} not valid for device {dev!r}", line=lineno, column=col_kind)
    col = col_kind + len(kind_text) + 1
    payload: dict[str, str] = {}
    if payload_text:
        for item in payload_text.split(";"):
            k, eq, v = item.partition("=")
            if not eq or not k or "=" in v:
                raise ParseError(f"bad payload item {item!r}", line=lineno, column=col)
            if k in payload:
                raise ParseError(f"duplicate payload key {k!r}", line=lineno, column=col)
            payload[k] = v
            col += len(item) + 1
    return LogRecord(int(t_text), dev, kind, payload)


def load(path) -> list[LogRecord]:
    return parse(Path(path).read_text(encoding="utf-8"))


# -- payload codecs ----------------------------------------------------------


def _floats(values) -> str:
    return ":".join(repr(float(v)) for v in values)


def _unfloats(text: str) -> list[float]:
    return [float(v) for v in text.split(":")] if text else []


def _ints(values) -> str:
    return ":".join(str(int(v)) for v in values)


def _unints(text: str) -> list[int]:
    return [int(v) for v in text.split(":")] if text else []


_AXES = "xyz"


def window_payload(
    motion: MotionWindow,
    touch: TouchWindow,
    vitals: Optional[VitalsSample] = None,
    baseline_hr: Optional[float] = None,
) -> dict[str, str]:
    out = {"rate": repr(motion.nominal_rate_hz), "mt": _ints(motion.t_ms.tolist())}
    for prefix, arr in (("a", motion.accel), ("g", motion.gyro), ("m", motion.mag)):
        for i, axis in enumerate(_AXES):
            out[prefix + axis] = _floats(arr[:, i].tolist())
    out["tt"] = _ints(touch.t_ms.tolist())
    out["ti"] = _floats(touch.intensity.tolist())
    if vitals is not None:
        out["hr"] = repr(float(vitals.heart_rate_bpm))
        out["hrt"] = str(int(vitals.t_ms))
        if vitals.eda_microsiemens is not None:
            out["eda"] = repr(float(vitals.eda_microsiemens))
    if baseline_hr is not None:
        out["hrb"] = repr(float(baseline_hr))
    return out


def window_from_payload(payload: Mapping[str, str]):
    """Decode a SensorWindow payload into ``(motion, touch, vitals, baseline_hr)``."""
    try:
        t = _unints(payload["mt"])
        cols = {k: _unfloats(payload[k]) for k in ("ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz")}
        motion = MotionWindow(
            t,
            list(zip(cols["ax"], cols["ay"], cols["az"])),
            list(zip(cols["gx"], cols["gy"], cols["gz"])),
            list(zip(cols["mx"], cols["my"], cols["mz"])),
            float(payload["rate"]),
        )
        touch = TouchWindow(_unints(payload["tt"]), _unfloats(payload["ti"]))
        vitals = None
        if "hr" in payload:
            eda = float(payload["eda"]) if "eda" in payload else None
            vitals = VitalsSample(int(payload["hrt"]), float(payload["hr"]), eda)
        baseline = float(payload["hrb"]) if "hrb" in payload else None
    except (KeyError, ValueError) as exc:
        raise ReplayGapError(f"incomplete sensor window payload: {exc}") from None
    return motion, touch, vitals, baseline


def summary_payload(summary: InteractionSummary) -> dict[str, str]:
    return {"affect": summary.affect.value, "motion": summary.motion.value, "touch": summary.touch.value}


def summary_from_record(record: LogRecord) -> InteractionSummary:
    p = record.payload
    try:
        return InteractionSummary(
            record.device_id, record.t_ms, MotionClass(p["motion"]), TouchClass(p["touch"]), AffectState(p["affect"])
        )
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad classification payload at {record.t_ms} ms: {exc}") from None


def logged_classifications(records: Iterable[LogRecord]) -> list[InteractionSummary]:
    return [summary_from_record(r) for r in records if r.kind is RecordKind.CLASSIFICATION]


def replay_classifications(
    records: Sequence[LogRecord], th: ClassifierThresholds = ClassifierThresholds()
) -> list[InteractionSummary]:
    """Re-classify every logged sensor window, in log order.

    Each Classification record must be preceded by an unconsumed SensorWindow
    from the same device; otherwise the log has a gap and replay stops.
    """
    pending: dict[str, int] = {}
    out = []
    for r in records:
        if r.kind is RecordKind.SENSOR_WINDOW:
            motion, touch, vitals, baseline = window_from_payload(r.payload)
            out.append(classify_window(r.device_id, r.t_ms, motion, touch, vitals, baseline, th))
            pending[r.device_id] = pending.get(r.device_id, 0) + 1
        elif r.kind is RecordKind.CLASSIFICATION:
            if not pending.get(r.device_id):
                raise ReplayGapError(f"{r.device_id}: classification at {r.t_ms} ms has no logged window")
            pending[r.device_id] -= 1
    return out
