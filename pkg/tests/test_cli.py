from __future__ import annotations

import csv
import io
import json

import numpy as np
import pytest

from wearqc import cli
from wearqc.ingest import write_e4_archive
from wearqc.synthetic import DEFAULT_START, synthetic_session


def wearqc(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    sess = synthetic_session(1.0, seed=2).session
    write_e4_archive(sess, root / "p01" / "s1")
    (root / "labels.csv").write_text(
        f"name,start,end\nstress,{DEFAULT_START + 1800!r},{DEFAULT_START + 2100!r}\n"
        f"phone,{DEFAULT_START!r},{DEFAULT_START + 3000!r}\n")
    code, _, err = wearqc("ingest", "--in", root / "p01" / "s1", "--labels", root / "labels.csv",
                          "--participant", "p01", "--out", root / "m")
    assert code == 0, err
    return root


def test_nonwear(work):
    code, out, _ = wearqc("nonwear", "--algo", "refined", "--in", work / "p01" / "s1", "--out", work / "sqi.csv")
    assert code == 0 and "wear fraction" in out
    r = rows(work / "sqi.csv")
    assert r[0] == ["timestamp", "wrist_sqi", "movement_sqi", "temp_sqi", "eda_sqi"]
    assert len(r) - 1 == 4 * 3600
    doc = json.loads((work / "sqi.intervals.json").read_text())
    assert doc["algorithm"] == "refined" and doc["wear_intervals"]


def test_nonwear_bottcher_per_minute(work):
    code, _, _ = wearqc("nonwear", "--algo", "bottcher", "--in", work / "p01" / "s1", "--out", work / "b.csv")
    assert code == 0
    t = np.array([float(x[0]) for x in rows(work / "b.csv")[1:]])
    assert np.all(np.diff(t) == 60.0)


def test_eda_process(work):
    code, _, _ = wearqc("eda-process", "--in", work / "p01" / "s1", "--out", work / "eda.csv", "--plot", work / "eda.svg")
    assert code == 0
    assert rows(work / "eda.csv")[0] == ["timestamp", "raw_us", "processed_us", "valid", "noise_amp_us",
                                         "range_sqi", "noise_sqi"]
    assert (work / "eda.svg").read_text().startswith("<?xml")


def test_activity_then_bootstrap(work):
    assert wearqc("activity", "--in", work / "p01" / "s1", "--out", work / "ai.csv")[0] == 0
    r = rows(work / "ai.csv")
    assert r[0] == ["timestamp", "ai_abs"] and len(r) - 1 == 3600
    args = ["bootstrap", "--in", work / "ai.csv", "--ratios", "0.9,0.75,0.6", "--iters", 20, "--seed", 7,
            "--method", "multi_block:1..5"]
    assert wearqc(*args, "--out", work / "s1.csv", "--jobs", 1)[0] == 0
    assert wearqc(*args, "--out", work / "s4.csv", "--jobs", 4, "--plot", work / "boot.svg")[0] == 0
    assert (work / "s1.csv").read_bytes() == (work / "s4.csv").read_bytes()
    assert len(rows(work / "s1.csv")) - 1 == 3 * 20 * 3


def test_windows(work):
    code, _, err = wearqc("windows", "--in", work / "m", "--rule", "event:stress:-600:1200:around",
                          "--valid", "wear", "--out", work / "r.csv", "--ccdf", work / "c.csv",
                          "--grid", "0,0.85,1", "--plot", work / "ccdf.svg")
    assert code == 0, err
    r = rows(work / "r.csv")
    assert r[0] == ["participant", "label", "start", "end", "ratio"] and len(r) == 2
    assert rows(work / "c.csv")[1:] == [["p01", "0.0", "1"], ["p01", "0.85", str(int(float(r[1][4]) >= 0.85))],
                                        ["p01", "1.0", str(int(float(r[1][4]) >= 1.0))]]


def test_compliance_and_config_merge(work):
    (work / "tool.cfg").write_text("study.tz=Asia/Seoul\n")
    code, _, _ = wearqc("compliance", "--in", work / "m", "--config", work / "tool.cfg", "--out", work / "c1.json")
    assert code == 0 and json.loads((work / "c1.json").read_text())["timezone"] == "Asia/Seoul"
    # flags win over the config file
    code, _, _ = wearqc("compliance", "--in", work / "m", "--config", work / "tool.cfg", "--tz", "UTC",
                        "--out", work / "c2.json", "--svg", work / "c2.svg")
    doc = json.loads((work / "c2.json").read_text())
    assert code == 0 and doc["timezone"] == "UTC" and set(doc["streams"]) == {"wearable", "phone", "labels"}
    wearqc("compliance", "--in", work / "m", "--out", work / "c3.json")
    assert (work / "c2.json").read_bytes() == (work / "c3.json").read_bytes()


def test_webhook_failure_keeps_exit_zero(work, stub_server, no_sleep):
    stub_server.statuses = [500]
    now = DEFAULT_START + 2 * 86400
    code, out, err = wearqc("compliance", "--in", work / "m", "--out", work / "w.json",
                            "--webhook-url", stub_server.url, "--now", now)
    assert code == 0 and stub_server.hits == 3
    assert "delivery failed after 3 attempt(s)" in err


def test_webhook_env_fallback(work, stub_server, monkeypatch):
    monkeypatch.setenv("WEARQC_WEBHOOK_URL", stub_server.url)
    code, out, _ = wearqc("compliance", "--in", work / "m", "--out", work / "w.json",
                          "--now", DEFAULT_START + 2 * 86400)
    assert code == 0 and stub_server.hits == 1 and "delivered alert for p01" in out
    body = json.loads(stub_server.bodies[0])
    assert body["participant_id"] == "p01" and body["hours_in_lookback"] == 0.0


def test_bench(work):
    code, out, _ = wearqc("bench", "nonwear", "--hours", 1, "--seed", 1, "--reps", 1)
    assert code == 0
    assert "refined" in out and "bottcher" in out and "speedup" in out


def test_missing_input(work):
    code, _, err = wearqc("nonwear", "--in", work / "nope", "--out", work / "x.csv")
    assert code == 1 and str(work / "nope") in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["nonwear", "--bogus"], [], ["nonwear", "--algo", "magic",
                                  "--in", "x", "--out", "y"]])
def test_usage_errors(argv, capsys):
    code, _, err = wearqc(*argv)
    assert code == 1 and "usage" in err.lower()


def test_user_errors(work):
    assert wearqc("windows", "--in", work / "m", "--rule", "weekly:1", "--out", work / "x.csv")[0] == 1
    (work / "bad.cfg").write_text("nope.key=1\n")
    code, _, err = wearqc("activity", "--in", work / "p01" / "s1", "--out", work / "x.csv", "--config", work / "bad.cfg")
    assert code == 1 and "unknown config key" in err
    assert wearqc("activity", "--in", work / "p01" / "s1", "--out", work / "x.csv", "--jobs", 0)[0] == 1


def test_internal_error_exit_two(work, monkeypatch):
    def broken(*a):
        raise RuntimeError("boom")
    monkeypatch.setattr(cli, "cmd_activity", broken)
    code, _, err = wearqc("activity", "--in", work / "p01" / "s1", "--out", work / "x.csv")
    assert code == 2 and "internal error" in err and "boom" in err


def test_help_exits_zero():
    assert wearqc("--help")[0] == 0
