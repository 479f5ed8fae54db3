import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tangtoys.errors import OrderingError, ParseError, ReplayGapError, ValidationError
from tangtoys.interaction_log import (
    HEADER,
    InteractionLog,
    LogRecord,
    RecordKind,
    format_record,
    logged_classifications,
    parse,
    replay_classifications,
    serialize,
    summary_payload,
    window_from_payload,
    window_payload,
)
from tangtoys.sensing import (
    AffectState,
    ClassifierThresholds,
    MotionClass,
    MotionWindow,
    TouchClass,
    TouchWindow,
    VitalsSample,
    classify_window,
    summarize,
)

CLS = RecordKind.CLASSIFICATION


class TestAppend:
    def test_classification_line(self):
        r = LogRecord(12000, "d1", CLS, {"motion": "Aggressive", "touch": "NoTouch", "affect": "Negative"})
        assert format_record(r) == "12000,d1,Classification,affect=Negative;motion=Aggressive;touch=NoTouch"

    def test_empty_payload(self):
        assert format_record(LogRecord(1000, "d1", RecordKind.TX_ADV, {})) == "1000,d1,TxAdv,"

    def test_time_regression(self):
        log = InteractionLog()
        log.append(LogRecord(2000, "d1", CLS, {}))
        log.append(LogRecord(1000, "d2", CLS, {}))  # other device, fine
        with pytest.raises(OrderingError):
            log.append(LogRecord(1999, "d1", CLS, {}))
        assert len(log) == 2

    @pytest.mark.parametrize("value", ["a;b", "a=b", "a,b", "a\nb"])
    def test_reserved_values(self, value):
        with pytest.raises(ValidationError):
            InteractionLog().append(LogRecord(0, "d1", CLS, {"k": value}))

    def test_medium_kind_only_for_medium(self):
        with pytest.raises(ValidationError):
            format_record(LogRecord(0, "d1", RecordKind.DELIVER, {}))
        with pytest.raises(ValidationError):
            format_record(LogRecord(0, "MED", CLS, {}))

    def test_to_text(self):
        log = InteractionLog([LogRecord(0, "d1", RecordKind.TX_ADV, {"seq": "1"})])
        assert log.to_text() == HEADER + "\n0,d1,TxAdv,seq=1\n"


class TestParse:
    def test_round_trip(self):
        recs = [
            LogRecord(0, "d1", RecordKind.TX_ADV, {}),
            LogRecord(100, "d2", RecordKind.RX_ADV, {"from": "d1", "seq": "1", "rssi": "-60.0"}),
            LogRecord(100, "MED", RecordKind.DELIVER, {"from": "d1", "to": "d2", "kind": "ADV", "rssi": "-60.0"}),
            LogRecord(200, "d1", CLS, {"affect": "Neutral", "motion": "Calm", "touch": "NoTouch", "x": ""}),
        ]
        assert parse(serialize(recs)) == recs

    def test_two_commas(self):
        with pytest.raises(ParseError) as err:
            parse(HEADER + "\n0,d1,TxAdv,\n100,d1,TxAdv\n")
        assert err.value.line == 3
        assert err.value.column == len("100,d1,TxAdv") + 1

    def test_unknown_kind(self):
        with pytest.raises(ParseError) as err:
            parse(HEADER + "\n0,d1,Sneeze,\n")
        assert err.value.line == 2 and err.value.column == 6

    @pytest.mark.parametrize(
        "line", ["x,d1,TxAdv,", "-5,d1,TxAdv,", "0,,TxAdv,", "0,d1,TxAdv,k", "0,d1,TxAdv,=v", "0,d1,TxAdv,a=1;a=2"]
    )
    def test_malformed(self, line):
        with pytest.raises(ParseError) as err:
            parse(HEADER + "\n" + line + "\n")
        assert err.value.line == 2

    def test_missing_header(self):
        with pytest.raises(ParseError):
            parse("0,d1,TxAdv,\n")

    def test_empty(self):
        assert parse("") == []
        assert parse(HEADER + "\n") == []

    def test_time_regression_rejected(self):
        with pytest.raises(ParseError):
            parse(HEADER + "\n100,d1,TxAdv,\n50,d1,TxAdv,\n")

    def test_concatenation(self):
        a = [LogRecord(0, "d1", RecordKind.TX_ADV, {}), LogRecord(100, "d1", CLS, {"k": "v"})]
        b = [LogRecord(100, "d1", RecordKind.TX_ADV, {}), LogRecord(900, "d1", CLS, {})]
        assert parse(serialize(a) + serialize(b)) == a + b


token = st.text(alphabet=st.characters(blacklist_characters=",;=\n\r", blacklist_categories=("Cs",)), min_size=1,
                max_size=8)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.integers(0, 5000),
            st.sampled_from(["d1", "d2", "toy-3"]),
            st.sampled_from([k for k in RecordKind if k is not RecordKind.DELIVER]),
            st.dictionaries(token, st.one_of(token, st.just("")), max_size=4),
        ),
        max_size=30,
    )
)
def test_round_trip_property(rows):
    rows.sort(key=lambda r: r[0])
    recs = [LogRecord(t, d, k, p) for t, d, k, p in rows]
    log = InteractionLog(recs)
    assert parse(log.to_text()) == recs
    assert log.to_text() == serialize(recs)


def sample_windows():
    rng = np.random.default_rng(5)
    t = np.arange(100) * 20
    motion = MotionWindow(t, rng.normal(0, 5, (100, 3)), rng.normal(0, 1, (100, 3)), rng.normal(0, 30, (100, 3)))
    touch = TouchWindow(np.arange(40) * 50, rng.uniform(0, 1, 40))
    return motion, touch


class TestReplay:
    def test_window_payload_lossless(self):
        motion, touch = sample_windows()
        vitals = VitalsSample(10, 101.5, 2.25)
        m, t, v, b = window_from_payload(window_payload(motion, touch, vitals, 99.0))
        assert m == motion and t == touch and v == vitals and b == 99.0
        rec = LogRecord(0, "d1", RecordKind.SENSOR_WINDOW, window_payload(motion, touch))
        (back,) = parse(serialize([rec]))
        m2, t2, v2, b2 = window_from_payload(back.payload)
        assert m2 == motion and t2 == touch and v2 is None and b2 is None

    def test_replay_matches(self):
        motion, touch = sample_windows()
        th = ClassifierThresholds()
        s = classify_window("d1", 500, motion, touch, None, None, th)
        recs = [
            LogRecord(500, "d1", RecordKind.SENSOR_WINDOW, window_payload(motion, touch)),
            LogRecord(500, "d1", CLS, summary_payload(s)),
        ]
        recs = parse(serialize(recs))
        assert replay_classifications(recs, th) == logged_classifications(recs) == [s]

    def test_empty(self):
        assert replay_classifications([]) == []

    def test_gap(self):
        s = summarize("d1", 0, MotionClass.CALM, TouchClass.NO_TOUCH, AffectState.NEUTRAL)
        with pytest.raises(ReplayGapError):
            replay_classifications([LogRecord(0, "d1", CLS, summary_payload(s))])

    def test_gap_other_device(self):
        motion, touch = sample_windows()
        s = summarize("d2", 0, MotionClass.CALM, TouchClass.NO_TOUCH, AffectState.NEUTRAL)
        recs = [LogRecord(0, "d1", RecordKind.SENSOR_WINDOW, window_payload(motion, touch)),
                LogRecord(0, "d2", CLS, summary_payload(s))]
        with pytest.raises(ReplayGapError):
            replay_classifications(recs)

    def test_incomplete_payload(self):
        with pytest.raises(ReplayGapError):
            replay_classifications([LogRecord(0, "d1", RecordKind.SENSOR_WINDOW, {"mt": "0:20"})])
