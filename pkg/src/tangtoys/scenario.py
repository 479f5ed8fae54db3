"""Scenario scripts and sensor-window synthesis.

Grammar, one statement per line (``#`` starts a comment)::

    device <id> <kind> <x> <y>
    pair <id> <id>
    set <config.key> <value>
    at <t_ms> move <id> <x> <y>
    at <t_ms> touch <id> <peak_intensity> <rise_ms> <hold_ms>
    at <t_ms> shake <id> <amplitude_mps2> <freq_hz> <duration_ms>
    at <t_ms> vitals <id> <hr_bpm>
    end <t_ms>
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .config import check_key
from .core_model import SensorKind, ToyKind, check_device_id, make_profile, parse_toy_kind
from .errors import ConfigError, ParseError, ValidationError
from .radio import Position
from .sensing import GRAVITY_MPS2, MOTION_RATE_HZ, TOUCH_RATE_HZ, MotionWindow, TouchWindow

MOTION_STEP_MS = 1000.0 / MOTION_RATE_HZ
TOUCH_STEP_MS = 1000.0 / TOUCH_RATE_HZ
# rough geomagnetic field, carried through to the log but unused by classification
MAG_FIELD_UT = (20.0, 0.0, -40.0)


@dataclass(frozen=True)
class DeviceDecl:
    device_id: str
    kind: ToyKind
    position: Position
    line: int = 0


@dataclass(frozen=True)
class MoveEvent:
    t_ms: int
    device_id: str
    position: Position
    line: int = 0


@dataclass(frozen=True)
class TouchEvent:
    t_ms: int
    device_id: str
    peak_intensity: float
    rise_ms: int
    hold_ms: int
    line: int = 0


@dataclass(frozen=True)
class ShakeEvent:
    t_ms: int
    device_id: str
    amplitude_mps2: float
    freq_hz: float
    duration_ms: int
    line: int = 0


@dataclass(frozen=True)
class VitalsEvent:
    t_ms: int
    device_id: str
    hr_bpm: float
    line: int = 0


Event = Union[MoveEvent, TouchEvent, ShakeEvent, VitalsEvent]


@dataclass(frozen=True)
class Scenario:
    devices: tuple[DeviceDecl, ...]
    pairs: tuple[tuple[str, str], ...]
    events: tuple[Event, ...]
    end_ms: int
    overrides: dict[str, str] = field(default_factory=dict)

    def device_ids(self) -> list[str]:
        return sorted(d.device_id for d in self.devices)


_ARITY = {"device": 4, "pair": 2, "set": 2, "end": 1}
_EVENT_ARITY = {"move": 3, "touch": 4, "shake": 4, "vitals": 2}


def _num(text, lineno, conv=float, what="number"):
    try:
        v = conv(text)
    except ValueError:
        raise ParseError(f"expected {what}, got {text!r}", line=lineno) from None
    if isinstance(v, float) and not math.isfinite(v):
        raise ParseError(f"expected finite {what}, got {text!r}", line=lineno)
    return v


def _int(text, lineno, what="integer"):
    v = _num(text, lineno, int, what)
    if v < 0:
        raise ParseError(f"{what} must be non-negative, got {v}", line=lineno)
    return v


def parse_scenario(text: str) -> Scenario:
    devices: dict[str, DeviceDecl] = {}
    pairs: list[tuple[str, str, int]] = []
    events: list[Event] = []
    overrides: dict[str, str] = {}
    end_ms = None
    last_line = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        last_line = lineno
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        head, args = tokens[0], tokens[1:]
        if end_ms is not None:
            raise ParseError("statement after 'end'", line=lineno)
        if head == "at":
            if len(args) < 2:
                raise ParseError("'at' needs a time and an action", line=lineno)
            t = _int(args[0], lineno, "time in ms")
            action, rest = args[1], args[2:]
            if action not in _EVENT_ARITY:
                raise ParseError(f"unknown event {action!r}", line=lineno)
            if len(rest) != _EVENT_ARITY[action]:
                raise ParseError(f"'{action}' takes {_EVENT_ARITY[action]} arguments", line=lineno)
            events.append(_parse_event(t, action, rest, lineno))
            continue
        if head not in _ARITY:
            raise ParseError(f"unknown statement {head!r}", line=lineno)
        if len(args) != _ARITY[head]:
            raise ParseError(f"'{head}' takes {_ARITY[head]} arguments", line=lineno)
        if head == "device":
            dev_id, kind_name, x, y = args
            try:
                check_device_id(dev_id)
                kind = parse_toy_kind(kind_name)
            except ValidationError as exc:
                raise ParseError(str(exc), line=lineno) from None
            if dev_id in devices:
                raise ParseError(f"device {dev_id!r} declared twice", line=lineno)
            devices[dev_id] = DeviceDecl(dev_id, kind, Position(_num(x, lineno), _num(y, lineno)), lineno)
        elif head == "pair":
            pairs.append((args[0], args[1], lineno))
        elif head == "set":
            try:
                check_key(args[0])
            except ConfigError as exc:
                raise ParseError(str(exc), line=lineno) from None
            overrides[args[0]] = args[1]
        else:
            end_ms = _int(args[0], lineno, "end time")

    if end_ms is None:
        raise ParseError("missing 'end' statement", line=last_line + 1)

    paired: set[str] = set()
    for a, b, lineno in pairs:
        for d in (a, b):
            if d not in devices:
                raise ParseError(f"undeclared device {d!r}", line=lineno)
            if d in paired:
                raise ParseError(f"device {d!r} is already paired", line=lineno)
        if a == b:
            raise ParseError(f"cannot pair {a!r} with itself", line=lineno)
        paired.update((a, b))

    for ev in events:
        if ev.device_id not in devices:
            raise ParseError(f"undeclared device {ev.device_id!r}", line=ev.line)
        if ev.t_ms > end_ms:
            raise ParseError(f"event at {ev.t_ms} ms is after end ({end_ms} ms)", line=ev.line)
        if isinstance(ev, VitalsEvent):
            decl = devices[ev.device_id]
            if SensorKind.HEART_RATE not in make_profile(decl.kind, decl.device_id).sensors:
                raise ParseError(f"{decl.kind.value} {ev.device_id!r} has no heart-rate sensor", line=ev.line)

    return Scenario(
        tuple(devices.values()),
        tuple((a, b) for a, b, _ in pairs),
        tuple(events),
        end_ms,
        overrides,
    )


def _parse_event(t, action, rest, lineno) -> Event:
    dev = rest[0]
    if action == "move":
        return MoveEvent(t, dev, Position(_num(rest[1], lineno), _num(rest[2], lineno)), lineno)
    if action == "touch":
        peak = _num(rest[1], lineno, what="intensity")
        if not 0.0 <= peak <= 1.0:
            raise ParseError(f"touch intensity {peak} outside [0, 1]", line=lineno)
        return TouchEvent(t, dev, peak, _int(rest[2], lineno, "rise_ms"), _int(rest[3], lineno, "hold_ms"), lineno)
    if action == "shake":
        amp = _num(rest[1], lineno, what="amplitude")
        freq = _num(rest[2], lineno, what="frequency")
        duration = _int(rest[3], lineno, "duration_ms")
        if amp < 0 or freq < 0:
            raise ParseError("shake amplitude and frequency must be non-negative", line=lineno)
        if duration <= MOTION_STEP_MS:
            raise ParseError(f"shake must last longer than {MOTION_STEP_MS:g} ms", line=lineno)
        return ShakeEvent(t, dev, amp, freq, duration, lineno)
    hr = _num(rest[1], lineno, what="heart rate")
    if not 20.0 < hr < 250.0:
        raise ParseError(f"heart rate {hr} outside (20, 250)", line=lineno)
    return VitalsEvent(t, dev, hr, lineno)


# -- synthesis ---------------------------------------------------------------


def _offsets(span_ms: float, step_ms: float, inclusive: bool) -> np.ndarray:
    n = int(math.floor(span_ms / step_ms)) + 1 if inclusive else int(math.ceil(span_ms / step_ms))
    return np.round(np.arange(n) * step_ms).astype(np.int64)


def _rest_motion(t0: int, offsets: np.ndarray) -> MotionWindow:
    n = len(offsets)
    accel = np.zeros((n, 3))
    accel[:, 2] = GRAVITY_MPS2
    return MotionWindow(t0 + offsets, accel, np.zeros((n, 3)), np.tile(MAG_FIELD_UT, (n, 1)))


def synthesize_shake(ev: ShakeEvent) -> tuple[MotionWindow, TouchWindow, int]:
    """Sinusoid of the given amplitude on x, gravity on z; no touch.

    Returns the windows and the time at which they are complete.
    """
    m_off = _offsets(ev.duration_ms, MOTION_STEP_MS, inclusive=False)
    tau = m_off / 1000.0
    n = len(m_off)
    accel = np.zeros((n, 3))
    accel[:, 0] = ev.amplitude_mps2 * np.sin(2.0 * math.pi * ev.freq_hz * tau)
    accel[:, 2] = GRAVITY_MPS2
    motion = MotionWindow(ev.t_ms + m_off, accel, np.zeros((n, 3)), np.tile(MAG_FIELD_UT, (n, 1)))
    t_off = _offsets(ev.duration_ms, TOUCH_STEP_MS, inclusive=False)
    touch = TouchWindow(ev.t_ms + t_off, np.zeros(len(t_off)))
    return motion, touch, ev.t_ms + ev.duration_ms


def touch_profile(peak: float, rise_ms: float, hold_ms: float, tau_ms: np.ndarray) -> np.ndarray:
    """Trapezoid: linear rise, hold, linear fall back to zero."""
    tau = np.asarray(tau_ms, dtype=np.float64)
    up = np.clip(tau / rise_ms, 0.0, 1.0)
    down = np.clip((2 * rise_ms + hold_ms - tau) / rise_ms, 0.0, 1.0)
    return np.clip(peak * np.minimum(up, down), 0.0, 1.0)


def synthesize_touch(ev: TouchEvent) -> tuple[MotionWindow, TouchWindow, int]:
    """Touch trapezoid sampled at 20 Hz while the toy rests.

    A rise shorter than one touch sample period is stretched to one period,
    so an instant press still shows up as an onset between two samples.
    """
    rise = max(float(ev.rise_ms), TOUCH_STEP_MS)
    span = 2 * rise + ev.hold_ms
    t_off = _offsets(span, TOUCH_STEP_MS, inclusive=True)
    touch = TouchWindow(ev.t_ms + t_off, touch_profile(ev.peak_intensity, rise, ev.hold_ms, t_off))
    motion = _rest_motion(ev.t_ms, _offsets(span, MOTION_STEP_MS, inclusive=True))
    return motion, touch, ev.t_ms + int(math.ceil(span))
