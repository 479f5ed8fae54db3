"""Runtime library and proximity-network simulator for sensor-instrumented smart toys."""

from .core_model import ActuatorKind, DeviceProfile, SensorKind, ToyKind, make_profile, validate_event, validate_feedback
from .feedback import (
    DEFAULT_POLICY,
    FeedbackCause,
    FeedbackCommand,
    FeedbackPolicy,
    HapticPattern,
    LedColor,
    PatternId,
    map_partner_feedback,
    map_presence_feedback,
    render_pattern,
)
from .interaction_log import InteractionLog, LogRecord, RecordKind, parse, replay_classifications, serialize
from .radio import Advertisement, DataFrame, NeighborEntry, Position, RadioConfig, deliver, in_range, rssi_model
from .runtime import DeviceState, TickOutput, ingest_sensor_window, new_device, pair_devices, tick
from .scenario import Scenario, parse_scenario
from .sensing import (
    AffectState,
    ClassifierThresholds,
    InteractionSummary,
    MotionClass,
    MotionWindow,
    TouchClass,
    TouchWindow,
    VitalsSample,
    classify_motion,
    classify_touch,
    estimate_affect,
    extract_motion_features,
    summarize,
)
from .sim import Stats, Trace, analyze, check_conservation, run

__version__ = "0.1.0"
