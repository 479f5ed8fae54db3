"""Toy embodiments and their sensor/actuator capabilities."""

from __future__ import annotations

import dataclasses
import enum
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import CapabilityError, ValidationError

if TYPE_CHECKING:
    from .feedback import FeedbackCommand


class ToyKind(str, enum.Enum):
    BALL = "Ball"
    CUBE = "Cube"
    TEDDY_VISUAL = "TeddyVisual"
    TORUS = "Torus"
    TEDDY_HAPTIC = "TeddyHaptic"


class SensorKind(str, enum.Enum):
    IMU_9DOF = "Imu9Dof"
    CAPACITIVE_TOUCH = "CapacitiveTouch"
    HEART_RATE = "HeartRate"
    EDA = "Eda"


class ActuatorKind(str, enum.Enum):
    MULTI_COLOR_LED = "MultiColorLed"
    HAPTIC = "Haptic"


# 3 accel + 3 gyro + 3 magnetometer
IMU_CHANNELS = 9

_S = SensorKind
_A = ActuatorKind

CAPABILITIES: dict[ToyKind, tuple[frozenset[SensorKind], frozenset[ActuatorKind]]] = {
    ToyKind.BALL: (
        frozenset({_S.IMU_9DOF, _S.CAPACITIVE_TOUCH}),
        frozenset({_A.MULTI_COLOR_LED}),
    ),
    ToyKind.CUBE: (
        frozenset({_S.IMU_9DOF, _S.CAPACITIVE_TOUCH, _S.HEART_RATE, _S.EDA}),
        frozenset({_A.HAPTIC}),
    ),
    ToyKind.TEDDY_VISUAL: (
        frozenset({_S.IMU_9DOF, _S.CAPACITIVE_TOUCH}),
        frozenset({_A.MULTI_COLOR_LED}),
    ),
    # Torus lists no visual feedback, taken literally.
    ToyKind.TORUS: (
        frozenset({_S.HEART_RATE, _S.EDA, _S.IMU_9DOF, _S.CAPACITIVE_TOUCH}),
        frozenset({_A.HAPTIC}),
    ),
    ToyKind.TEDDY_HAPTIC: (
        frozenset({_S.IMU_9DOF, _S.CAPACITIVE_TOUCH}),
        frozenset({_A.HAPTIC, _A.MULTI_COLOR_LED}),
    ),
}

# Identifiers end up in log lines, so the log's separators are excluded.
_ID_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")
RESERVED_IDS = frozenset({"MED"})


def check_device_id(device_id: str) -> str:
    if not isinstance(device_id, str) or not _ID_RE.match(device_id):
        raise ValidationError(f"invalid device id {device_id!r}")
    if device_id in RESERVED_IDS:
        raise ValidationError(f"device id {device_id!r} is reserved")
    return device_id


def parse_toy_kind(name: str) -> ToyKind:
    for kind in ToyKind:
        if kind.value.lower() == name.lower():
            return kind
    raise ValidationError(f"unknown toy kind {name!r}")


@dataclass(frozen=True)
class DeviceProfile:
    kind: ToyKind
    sensors: frozenset[SensorKind]
    actuators: frozenset[ActuatorKind]
    device_id: str


def make_profile(kind: ToyKind, device_id: str) -> DeviceProfile:
    sensors, actuators = CAPABILITIES[ToyKind(kind)]
    return DeviceProfile(ToyKind(kind), sensors, actuators, check_device_id(device_id))


def validate_event(profile: DeviceProfile, channel: SensorKind) -> None:
    """Raise :class:`CapabilityError` unless ``channel`` is one of the toy's sensors."""
    if channel not in profile.sensors:
        raise CapabilityError(
            f"{profile.kind.value} {profile.device_id!r} has no {channel.value} sensor",
            kind=profile.kind,
            channel=channel,
        )


def validate_feedback(profile: DeviceProfile, command: FeedbackCommand) -> FeedbackCommand:
    """Return ``command`` restricted to the toy's actuators.

    The haptic half is replaced by the empty pattern when the toy has no motor,
    and the LED half is switched off when it has no LEDs. A non-empty command
    that loses both halves cannot be actuated and raises :class:`CapabilityError`.
    """
    from .feedback import NO_HAPTIC, LED_OFF

    has_haptic = command.haptic.repetitions > 0
    has_led = command.led != LED_OFF
    if not (has_haptic or has_led):
        return command
    keep_haptic = has_haptic and ActuatorKind.HAPTIC in profile.actuators
    keep_led = has_led and ActuatorKind.MULTI_COLOR_LED in profile.actuators
    if not (keep_haptic or keep_led):
        raise CapabilityError(
            f"{profile.kind.value} {profile.device_id!r} cannot actuate this command",
            kind=profile.kind,
        )
    if keep_haptic == has_haptic and keep_led == has_led:
        return command
    return dataclasses.replace(
        command,
        haptic=command.haptic if keep_haptic else NO_HAPTIC,
        led=command.led if keep_led else LED_OFF,
    )
