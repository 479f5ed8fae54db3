"""Feature extraction and rule-based classification of sensor windows.

Motion features are computed from accelerometer magnitudes, so they do not
depend on how the toy is oriented. The affect estimator is a fixed rule table
that stands in for a learned model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, InsufficientDataError, SensorFaultError, ValidationError

GRAVITY_MPS2 = 9.81
MOTION_RATE_HZ = 50.0
TOUCH_RATE_HZ = 20.0
WINDOW_MS = 2000


class MotionClass(str, enum.Enum):
    CALM = "Calm"
    ACTIVE = "Active"
    AGGRESSIVE = "Aggressive"

    @property
    def rank(self) -> int:
        return _MOTION_ORDER.index(self)


class TouchClass(str, enum.Enum):
    NO_TOUCH = "NoTouch"
    GENTLE = "Gentle"
    HARSH = "Harsh"

    @property
    def rank(self) -> int:
        return _TOUCH_ORDER.index(self)


class AffectState(str, enum.Enum):
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"
    POSITIVE = "Positive"


_MOTION_ORDER = list(MotionClass)
_TOUCH_ORDER = list(TouchClass)


@dataclass(frozen=True)
class MotionSample:
    t_ms: int
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float] = (0.0, 0.0, 0.0)
    mag: tuple[float, float, float] = (0.0, 0.0, 0.0)


def _frozen(arr, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype).reshape(-1)
    out.setflags(write=False)
    return out


class MotionWindow:
    """IMU samples for one classification window, stored column-wise.

    ``accel``, ``gyro`` and ``mag`` are ``(n, 3)`` float arrays in m/s², rad/s
    and µT. Arrays are read-only so a window can be shared between the device
    queue, the log and replay without copying.
    """

    __slots__ = ("t_ms", "accel", "gyro", "mag", "nominal_rate_hz")

    def __init__(self, t_ms, accel, gyro=None, mag=None, nominal_rate_hz=MOTION_RATE_HZ):
        t = _frozen(t_ms, np.int64)
        n = len(t)
        accel = np.array(accel, dtype=np.float64).reshape(n, 3)
        gyro = np.zeros((n, 3)) if gyro is None else np.array(gyro, dtype=np.float64).reshape(n, 3)
        mag = np.zeros((n, 3)) if mag is None else np.array(mag, dtype=np.float64).reshape(n, 3)
        for a in (accel, gyro, mag):
            a.setflags(write=False)
            if not np.all(np.isfinite(a)):
                raise ValidationError("motion samples must be finite")
        if n > 1 and not np.all(np.diff(t) > 0):
            raise ValidationError("motion timestamps must be strictly increasing")
        if not nominal_rate_hz > 0:
            raise ValidationError("nominal_rate_hz must be positive")
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "accel", accel)
        object.__setattr__(self, "gyro", gyro)
        object.__setattr__(self, "mag", mag)
        object.__setattr__(self, "nominal_rate_hz", float(nominal_rate_hz))

    def __setattr__(self, name, value):
        raise AttributeError("MotionWindow is immutable")

    @classmethod
    def from_samples(cls, samples: Sequence[MotionSample], nominal_rate_hz=MOTION_RATE_HZ):
        return cls(
            [s.t_ms for s in samples],
            [s.accel for s in samples],
            [s.gyro for s in samples],
            [s.mag for s in samples],
            nominal_rate_hz,
        )

    def __len__(self):
        return len(self.t_ms)

    def samples(self) -> list[MotionSample]:
        return [
            MotionSample(int(t), tuple(a), tuple(g), tuple(m))
            for t, a, g, m in zip(self.t_ms.tolist(), self.accel.tolist(), self.gyro.tolist(), self.mag.tolist())
        ]

    def __eq__(self, other):
        if not isinstance(other, MotionWindow):
            return NotImplemented
        return (
            self.nominal_rate_hz == other.nominal_rate_hz
            and np.array_equal(self.t_ms, other.t_ms)
            and np.array_equal(self.accel, other.accel)
            and np.array_equal(self.gyro, other.gyro)
            and np.array_equal(self.mag, other.mag)
        )

    def __repr__(self):
        return f"MotionWindow(n={len(self)}, rate={self.nominal_rate_hz:g}Hz)"


class TouchWindow:
    """Normalized capacitive intensities in [0, 1] with millisecond timestamps."""

    __slots__ = ("t_ms", "intensity")

    def __init__(self, t_ms, intensity):
        t = _frozen(t_ms, np.int64)
        x = _frozen(intensity, np.float64)
        if t.shape != x.shape:
            raise ValidationError("touch timestamps and intensities differ in length")
        if len(x) and not (np.all(np.isfinite(x)) and x.min() >= 0.0 and x.max() <= 1.0):
            raise ValidationError("touch intensity must lie in [0, 1]")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValidationError("touch timestamps must be strictly increasing")
        object.__setattr__(self, "t_ms", t)
        object.__setattr__(self, "intensity", x)

    def __setattr__(self, name, value):
        raise AttributeError("TouchWindow is immutable")

    def __len__(self):
        return len(self.t_ms)

    def __eq__(self, other):
        if not isinstance(other, TouchWindow):
            return NotImplemented
        return np.array_equal(self.t_ms, other.t_ms) and np.array_equal(self.intensity, other.intensity)

    def __repr__(self):
        return f"TouchWindow(n={len(self)})"


@dataclass(frozen=True)
class VitalsSample:
    t_ms: int
    heart_rate_bpm: float
    eda_microsiemens: Optional[float] = None

    def __post_init__(self):
        if not (20.0 < self.heart_rate_bpm < 250.0):
            raise SensorFaultError(f"heart rate {self.heart_rate_bpm} bpm outside (20, 250)")
        if self.eda_microsiemens is not None and not self.eda_microsiemens >= 0:
            raise SensorFaultError("EDA must be non-negative")


@dataclass(frozen=True)
class MotionFeatures:
    mean_mag: float
    std_mag: float
    peak_mag: float
    mean_gyro_mag: float


@dataclass(frozen=True)
class ClassifierThresholds:
    calm_max_std: float = 1.0
    aggressive_min_std: float = 8.0
    harsh_min_intensity: float = 0.8
    harsh_min_slope: float = 4.0  # per second
    gentle_min_intensity: float = 0.05
    hr_elevated_ratio: float = 1.2

    def __post_init__(self):
        if not 0 < self.calm_max_std < self.aggressive_min_std:
            raise ConfigError("need 0 < calm_max_std < aggressive_min_std")
        if not 0 < self.gentle_min_intensity < self.harsh_min_intensity <= 1:
            raise ConfigError("need 0 < gentle_min_intensity < harsh_min_intensity <= 1")
        if not self.harsh_min_slope > 0:
            raise ConfigError("harsh_min_slope must be positive")
        if not self.hr_elevated_ratio > 0:
            raise ConfigError("hr_elevated_ratio must be positive")


@dataclass(frozen=True)
class InteractionSummary:
    device_id: str
    t_ms: int
    motion: MotionClass
    touch: TouchClass
    affect: AffectState

    def classes(self) -> tuple[MotionClass, TouchClass, AffectState]:
        return (self.motion, self.touch, self.affect)


def extract_motion_features(window: MotionWindow) -> MotionFeatures:
    if len(window) < 2:
        raise InsufficientDataError(f"need at least 2 motion samples, got {len(window)}")
    mags = np.sqrt(np.einsum("ij,ij->i", window.accel, window.accel))
    gyro_mags = np.sqrt(np.einsum("ij,ij->i", window.gyro, window.gyro))
    mean = float(mags.mean())
    std = float(np.sqrt(np.mean((mags - mean) ** 2)))
    # max() is exact while mean() rounds, so guard the peak >= mean invariant
    peak = max(float(mags.max()), mean)
    return MotionFeatures(mean, std, peak, float(gyro_mags.mean()))


def classify_motion(features: MotionFeatures, th: ClassifierThresholds = ClassifierThresholds()) -> MotionClass:
    if features.std_mag < th.calm_max_std:
        return MotionClass.CALM
    if features.std_mag >= th.aggressive_min_std:
        return MotionClass.AGGRESSIVE
    return MotionClass.ACTIVE


def max_onset_slope(window: TouchWindow) -> float:
    """Steepest rise between consecutive samples, in intensity per second."""
    if len(window) < 2:
        return 0.0
    dx = np.diff(window.intensity)
    dt = np.diff(window.t_ms) / 1000.0
    return max(0.0, float((dx / dt).max()))


def classify_touch(window: TouchWindow, th: ClassifierThresholds = ClassifierThresholds()) -> TouchClass:
    if len(window) == 0:
        return TouchClass.NO_TOUCH
    peak = float(window.intensity.max())
    if peak < th.gentle_min_intensity:
        return TouchClass.NO_TOUCH
    if peak >= th.harsh_min_intensity and max_onset_slope(window) >= th.harsh_min_slope:
        return TouchClass.HARSH
    return TouchClass.GENTLE


def estimate_affect(
    motion: MotionClass,
    touch: TouchClass,
    vitals: Optional[VitalsSample] = None,
    baseline_hr: Optional[float] = None,
    th: ClassifierThresholds = ClassifierThresholds(),
) -> AffectState:
    if vitals is not None and baseline_hr is None:
        raise ConfigError("heart rate given without a baseline")
    if motion is MotionClass.AGGRESSIVE or touch is TouchClass.HARSH:
        return AffectState.NEGATIVE
    if motion is MotionClass.CALM and touch is TouchClass.GENTLE:
        return AffectState.POSITIVE
    if vitals is not None and vitals.heart_rate_bpm > th.hr_elevated_ratio * baseline_hr:
        return AffectState.NEGATIVE
    return AffectState.NEUTRAL


def summarize(device_id, t_ms, motion, touch, affect) -> InteractionSummary:
    return InteractionSummary(device_id, int(t_ms), MotionClass(motion), TouchClass(touch), AffectState(affect))


def classify_window(
    device_id: str,
    t_ms: int,
    motion: MotionWindow,
    touch: TouchWindow,
    vitals: Optional[VitalsSample],
    baseline_hr: Optional[float],
    th: ClassifierThresholds,
) -> InteractionSummary:
    """Run the full pipeline for one window. Shared by the live runtime and log replay."""
    motion_class = classify_motion(extract_motion_features(motion), th)
    touch_class = classify_touch(touch, th)
    affect = estimate_affect(motion_class, touch_class, vitals, baseline_hr, th)
    return summarize(device_id, t_ms, motion_class, touch_class, affect)

