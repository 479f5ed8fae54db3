"""Haptic/LED feedback: policy lookup and pattern rendering."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Mapping, Optional

from .errors import ConfigError
from .sensing import InteractionSummary, MotionClass, TouchClass


class PatternId(str, enum.Enum):
    NONE = "None"
    SOFT_SHORT = "SoftShort"
    SUBTLE = "Subtle"
    PRONOUNCED = "Pronounced"
    PROLONGED_SHARP = "ProlongedSharp"


class FeedbackCause(str, enum.Enum):
    PARTNER_INTERACTION = "PartnerInteraction"
    PRESENCE = "Presence"


@dataclass(frozen=True)
class HapticPattern:
    pattern_id: PatternId
    amplitude: float = 0.0
    pulse_ms: int = 0
    gap_ms: int = 0
    repetitions: int = 0

    def __post_init__(self):
        if (self.pattern_id is PatternId.NONE) != (self.repetitions == 0):
            raise ConfigError("pattern None must have exactly zero repetitions")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ConfigError(f"haptic amplitude {self.amplitude} outside [0, 1]")
        if self.repetitions < 0 or self.gap_ms < 0:
            raise ConfigError("repetitions and gap_ms must be non-negative")
        if self.repetitions > 0 and self.pulse_ms <= 0:
            raise ConfigError("pulse_ms must be positive")


@dataclass(frozen=True)
class LedColor:
    r: int
    g: int
    b: int

    def __post_init__(self):
        for c in (self.r, self.g, self.b):
            if not (isinstance(c, int) and 0 <= c <= 255):
                raise ConfigError(f"LED channel {c!r} outside 0..255")

    def __str__(self):
        return f"{self.r}:{self.g}:{self.b}"

    @classmethod
    def parse(cls, text: str) -> "LedColor":
        parts = text.replace(":", ",").split(",")
        if len(parts) != 3:
            raise ConfigError(f"bad LED color {text!r}")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError:
            raise ConfigError(f"bad LED color {text!r}") from None


NO_HAPTIC = HapticPattern(PatternId.NONE)
LED_OFF = LedColor(0, 0, 0)
RED = LedColor(255, 0, 0)


@dataclass(frozen=True)
class FeedbackAction:
    haptic: HapticPattern
    led: LedColor


@dataclass(frozen=True)
class FeedbackCommand:
    haptic: HapticPattern
    led: LedColor
    cause: FeedbackCause
    t_ms: int

    @property
    def is_empty(self) -> bool:
        return self.haptic.repetitions == 0 and self.led == LED_OFF


@dataclass(frozen=True)
class FeedbackPolicy:
    """Which feedback to actuate for partner interactions and neighbor counts.

    ``partner_alarm`` answers aggressive motion or harsh touch, ``partner_comfort``
    answers calm motion with gentle touch; every other partner interaction is
    silent. ``presence_one`` and ``presence_many`` are played when the neighbor
    count rises into the one-neighbor and several-neighbor bands.
    """

    partner_alarm: FeedbackAction = FeedbackAction(
        HapticPattern(PatternId.PROLONGED_SHARP, 1.0, 500, 100, 3), RED
    )
    partner_comfort: FeedbackAction = FeedbackAction(
        HapticPattern(PatternId.SOFT_SHORT, 0.3, 150, 0, 1), LedColor(0, 128, 0)
    )
    presence_one: FeedbackAction = FeedbackAction(
        HapticPattern(PatternId.SUBTLE, 0.3, 150, 0, 1), LedColor(0, 0, 255)
    )
    presence_many: FeedbackAction = FeedbackAction(
        HapticPattern(PatternId.PRONOUNCED, 0.8, 300, 100, 3), LedColor(0, 255, 0)
    )
    led_hold_ms: int = 2000

    def __post_init__(self):
        alarm = self.partner_alarm
        if alarm.haptic.pattern_id is not PatternId.PROLONGED_SHARP or alarm.led != RED:
            raise ConfigError("aggressive/harsh partner feedback must stay ProlongedSharp + red")
        if self.presence_one.haptic.amplitude > self.presence_many.haptic.amplitude:
            raise ConfigError("presence amplitude must not decrease with neighbor count")
        if self.led_hold_ms < 0:
            raise ConfigError("led_hold_ms must be non-negative")


DEFAULT_POLICY = FeedbackPolicy()


def _command(action: FeedbackAction, cause: FeedbackCause, t_ms: int) -> Optional[FeedbackCommand]:
    cmd = FeedbackCommand(action.haptic, action.led, cause, int(t_ms))
    return None if cmd.is_empty else cmd


def map_partner_feedback(
    summary: InteractionSummary, policy: FeedbackPolicy = DEFAULT_POLICY, t_ms: Optional[int] = None
) -> Optional[FeedbackCommand]:
    when = summary.t_ms if t_ms is None else t_ms
    if summary.motion is MotionClass.AGGRESSIVE or summary.touch is TouchClass.HARSH:
        return _command(policy.partner_alarm, FeedbackCause.PARTNER_INTERACTION, when)
    if summary.motion is MotionClass.CALM and summary.touch is TouchClass.GENTLE:
        return _command(policy.partner_comfort, FeedbackCause.PARTNER_INTERACTION, when)
    return None


def presence_band(count: int) -> int:
    return min(count, 2)


def map_presence_feedback(
    neighbor_count: int, previous_count: int, policy: FeedbackPolicy = DEFAULT_POLICY, t_ms: int = 0
) -> Optional[FeedbackCommand]:
    """Feedback for a change in the number of nearby toys.

    Only a rise into a higher band alerts; departures and unchanged bands are
    silent.
    """
    if neighbor_count < 0 or previous_count < 0:
        raise ValueError("neighbor counts must be non-negative")
    band, prev = presence_band(neighbor_count), presence_band(previous_count)
    if band <= prev:
        return None
    action = policy.presence_one if band == 1 else policy.presence_many
    return _command(action, FeedbackCause.PRESENCE, t_ms)


def render_pattern(p: HapticPattern) -> list[tuple[int, int, float]]:
    """Expand a pattern into ``(start_ms, duration_ms, amplitude)`` pulses."""
    period = p.pulse_ms + p.gap_ms
    return [(i * period, p.pulse_ms, p.amplitude) for i in range(p.repetitions)]


def pattern_span_ms(p: HapticPattern) -> int:
    if p.repetitions == 0:
        return 0
    return p.repetitions * p.pulse_ms + (p.repetitions - 1) * p.gap_ms


# -- key-value serialization -------------------------------------------------

_ACTION_KEYS = {
    "partner.aggressive": "partner_alarm",
    "partner.calm": "partner_comfort",
    "presence.one": "presence_one",
    "presence.many": "presence_many",
}
_HAPTIC_FIELDS = {"amplitude": float, "pulse_ms": int, "gap_ms": int, "repetitions": int}
_ROLE_PATTERN = {
    "partner_alarm": PatternId.PROLONGED_SHARP,
    "partner_comfort": PatternId.SOFT_SHORT,
    "presence_one": PatternId.SUBTLE,
    "presence_many": PatternId.PRONOUNCED,
}


def policy_keys() -> list[str]:
    keys = ["feedback.led_hold_ms"]
    for prefix in _ACTION_KEYS:
        keys += [f"{prefix}.haptic.{f}" for f in _HAPTIC_FIELDS] + [f"{prefix}.led"]
    return sorted(keys)


def policy_to_mapping(policy: FeedbackPolicy) -> dict[str, str]:
    out = {"feedback.led_hold_ms": str(policy.led_hold_ms)}
    for prefix, attr in _ACTION_KEYS.items():
        action = getattr(policy, attr)
        for f in _HAPTIC_FIELDS:
            out[f"{prefix}.haptic.{f}"] = str(getattr(action.haptic, f))
        out[f"{prefix}.led"] = f"{action.led.r},{action.led.g},{action.led.b}"
    return out


def policy_from_mapping(values: Mapping[str, str], base: FeedbackPolicy = DEFAULT_POLICY) -> FeedbackPolicy:
    """Override ``base`` with ``policy.*``-style keys; unknown keys are ignored.

    Setting ``repetitions`` to 0 turns that action's haptic part off.
    """
    changes = {}
    if "feedback.led_hold_ms" in values:
        changes["led_hold_ms"] = _convert("feedback.led_hold_ms", values["feedback.led_hold_ms"], int)
    for prefix, attr in _ACTION_KEYS.items():
        action = getattr(base, attr)
        fields = {f: getattr(action.haptic, f) for f in _HAPTIC_FIELDS}
        touched = False
        for f, conv in _HAPTIC_FIELDS.items():
            key = f"{prefix}.haptic.{f}"
            if key in values:
                fields[f] = _convert(key, values[key], conv)
                touched = True
        led = action.led
        if f"{prefix}.led" in values:
            led = LedColor.parse(values[f"{prefix}.led"])
            touched = True
        if touched:
            pid = _ROLE_PATTERN[attr] if fields["repetitions"] > 0 else PatternId.NONE
            changes[attr] = FeedbackAction(HapticPattern(pid, **fields), led)
    return dataclasses.replace(base, **changes) if changes else base


def _convert(key, text, conv):
    try:
        return conv(text)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {text!r}") from None
