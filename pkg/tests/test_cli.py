import pytest

from tangtoys.cli import main
from tangtoys.interaction_log import parse

SCENARIO = """device a TeddyHaptic 0 0
device b TeddyHaptic 10 0
pair a b
at 3000 shake a 40 5 2000
end 6000
"""


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "s.scn"
    p.write_text(SCENARIO)
    return p


def test_run_analyze_replay(tmp_path, scenario, capsys):
    out = tmp_path / "t.trace"
    assert main(["sim", "run", str(scenario), "--seed", "3", "--out", str(out)]) == 0
    assert out.read_text().startswith("tangtoys-log,v1\n")
    assert main(["sim", "analyze", str(out)]) == 0
    text = capsys.readouterr().out
    assert "feedback_partner" in text and "Negative" in text
    assert main(["sim", "analyze", str(out), "--device", "b", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("device,") and lines[1].startswith("b,") and len(lines) == 2
    assert main(["sim", "replay", str(out)]) == 0
    assert "match: 1" in capsys.readouterr().out


def test_stdout_and_determinism(scenario, capsys):
    assert main(["sim", "run", str(scenario), "--seed", "9", "--loss", "0.3"]) == 0
    first = capsys.readouterr().out
    assert main(["sim", "run", str(scenario), "--seed", "9", "--loss", "0.3"]) == 0
    assert capsys.readouterr().out == first
    assert parse(first)


def test_precedence(tmp_path, scenario, capsys):
    # scenario set < config file < CLI flag
    cfg = tmp_path / "c.conf"
    cfg.write_text("# override\nradio.range_m = 5\n")
    sc = tmp_path / "far.scn"
    sc.write_text("set radio.range_m 100\n" + SCENARIO)
    assert main(["sim", "run", str(sc)]) == 0
    assert ",RxAdv," in capsys.readouterr().out
    assert main(["sim", "run", str(sc), "--config", str(cfg)]) == 0
    assert ",RxAdv," not in capsys.readouterr().out
    assert main(["sim", "run", str(sc), "--config", str(cfg), "--range-m", "20"]) == 0
    assert ",RxAdv," in capsys.readouterr().out


def test_validation_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text("device a Ball 0 0\n")
    assert main(["sim", "run", str(bad)]) == 1
    assert "missing 'end'" in capsys.readouterr().err
    assert main(["sim", "run", str(tmp_path / "nope.scn")]) == 1
    garbage = tmp_path / "g.trace"
    garbage.write_text("tangtoys-log,v1\n1,a\n")
    assert main(["sim", "analyze", str(garbage)]) == 1
    cfg = tmp_path / "c.conf"
    cfg.write_text("radio.colour=red\n")
    ok = tmp_path / "ok.scn"
    ok.write_text(SCENARIO)
    assert main(["sim", "run", str(ok), "--config", str(cfg)]) == 1
    assert main(["sim", "run", str(ok), "--loss", "1.0"]) == 1


def test_replay_mismatch_exit_2(tmp_path, scenario, capsys):
    out = tmp_path / "t.trace"
    main(["sim", "run", str(scenario), "--out", str(out)])
    out.write_text(out.read_text().replace("motion=Aggressive", "motion=Calm"))
    assert main(["sim", "replay", str(out)]) == 2
    assert "mismatch" in capsys.readouterr().out


def test_replay_gap_exit_1(tmp_path, capsys):
    t = tmp_path / "gap.trace"
    t.write_text("tangtoys-log,v1\n100,a,Classification,affect=Neutral;motion=Calm;touch=NoTouch\n")
    assert main(["sim", "replay", str(t)]) == 1
