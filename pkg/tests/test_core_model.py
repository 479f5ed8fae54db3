import itertools

import pytest

from tangtoys.core_model import (
    CAPABILITIES,
    ActuatorKind,
    SensorKind,
    ToyKind,
    make_profile,
    parse_toy_kind,
    validate_event,
    validate_feedback,
)
from tangtoys.errors import CapabilityError, ValidationError
from tangtoys.feedback import LED_OFF, NO_HAPTIC, FeedbackCause, FeedbackCommand, HapticPattern, LedColor, PatternId

S, A = SensorKind, ActuatorKind
BUZZ = HapticPattern(PatternId.PROLONGED_SHARP, 1.0, 500, 100, 3)
RED = LedColor(255, 0, 0)


def cmd(haptic=NO_HAPTIC, led=LED_OFF):
    return FeedbackCommand(haptic, led, FeedbackCause.PARTNER_INTERACTION, 0)


class TestProfiles:
    def test_five_kinds(self):
        assert len(ToyKind) == 5
        assert set(CAPABILITIES) == set(ToyKind)

    @pytest.mark.parametrize(
        "kind,sensors,actuators",
        [
            (ToyKind.BALL, {S.IMU_9DOF, S.CAPACITIVE_TOUCH}, {A.MULTI_COLOR_LED}),
            (ToyKind.CUBE, {S.IMU_9DOF, S.CAPACITIVE_TOUCH, S.HEART_RATE, S.EDA}, {A.HAPTIC}),
            (ToyKind.TEDDY_VISUAL, {S.IMU_9DOF, S.CAPACITIVE_TOUCH}, {A.MULTI_COLOR_LED}),
            (ToyKind.TORUS, {S.IMU_9DOF, S.CAPACITIVE_TOUCH, S.HEART_RATE, S.EDA}, {A.HAPTIC}),
            (ToyKind.TEDDY_HAPTIC, {S.IMU_9DOF, S.CAPACITIVE_TOUCH}, {A.HAPTIC, A.MULTI_COLOR_LED}),
        ],
    )
    def test_table_rows(self, kind, sensors, actuators):
        p = make_profile(kind, "d1")
        assert p.sensors == sensors
        assert p.actuators == actuators
        assert p.kind is kind and p.device_id == "d1"

    def test_every_profile_has_an_actuator(self):
        for kind in ToyKind:
            assert make_profile(kind, "x").actuators

    def test_pure(self):
        for kind in ToyKind:
            assert make_profile(kind, "a") == make_profile(kind, "a")

    @pytest.mark.parametrize("bad", ["", "MED", "a,b", "a;b", "a=b", "a b"])
    def test_bad_ids(self, bad):
        with pytest.raises(ValidationError):
            make_profile(ToyKind.BALL, bad)

    def test_parse_kind(self):
        assert parse_toy_kind("teddyhaptic") is ToyKind.TEDDY_HAPTIC
        with pytest.raises(ValidationError):
            parse_toy_kind("Teddy")


class TestValidateEvent:
    def test_ball_has_no_heart_rate(self):
        with pytest.raises(CapabilityError) as err:
            validate_event(make_profile(ToyKind.BALL, "b"), S.HEART_RATE)
        assert err.value.channel is S.HEART_RATE
        assert err.value.kind is ToyKind.BALL

    def test_cube_heart_rate(self):
        validate_event(make_profile(ToyKind.CUBE, "c"), S.HEART_RATE)

    @pytest.mark.parametrize("kind", list(ToyKind))
    def test_own_channels_accepted(self, kind):
        p = make_profile(kind, "d")
        for ch in p.sensors:
            validate_event(p, ch)


class TestValidateFeedback:
    def test_ball_rejects_haptic_only(self):
        with pytest.raises(CapabilityError):
            validate_feedback(make_profile(ToyKind.BALL, "b"), cmd(haptic=BUZZ))

    def test_full_capability_unchanged(self):
        c = cmd(BUZZ, RED)
        assert validate_feedback(make_profile(ToyKind.TEDDY_HAPTIC, "t"), c) is c

    def test_cube_strips_led(self):
        out = validate_feedback(make_profile(ToyKind.CUBE, "c"), cmd(BUZZ, RED))
        assert out.haptic == BUZZ and out.led == LED_OFF

    def test_ball_strips_haptic(self):
        out = validate_feedback(make_profile(ToyKind.BALL, "b"), cmd(BUZZ, RED))
        assert out.haptic == NO_HAPTIC and out.led == RED

    def test_empty_command_passes(self):
        c = cmd()
        assert validate_feedback(make_profile(ToyKind.BALL, "b"), c) is c

    def test_exhaustive_never_exceeds_capabilities(self):
        patterns = [NO_HAPTIC] + [HapticPattern(pid, 0.5, 100, 50, 2) for pid in PatternId if pid is not PatternId.NONE]
        leds = [LED_OFF, RED, LedColor(0, 0, 255)]
        for kind, haptic, led in itertools.product(ToyKind, patterns, leds):
            p = make_profile(kind, "d")
            try:
                out = validate_feedback(p, cmd(haptic, led))
            except CapabilityError:
                continue
            if out.haptic.repetitions:
                assert A.HAPTIC in p.actuators
            if out.led != LED_OFF:
                assert A.MULTI_COLOR_LED in p.actuators
