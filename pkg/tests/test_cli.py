import csv
import json
import subprocess
import sys

import pytest

from streamlabel.cli import main


@pytest.fixture(scope="module")
def synth(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert main(["gen-synthetic", "--out", str(d), "--seed", "3"]) == 0
    return d


def label_args(synth, out, *extra):
    return ["label", "--labeled", str(synth / "labeled.csv"), "--stream", str(synth / "stream.csv"),
            "--truth", str(synth / "truth.csv"), "--out", str(out), *extra]


def test_gen_synthetic_files(synth):
    with open(synth / "stream.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id", "f0", "f1", "label"] and len(rows) == 1001
    assert all(r[-1] == "" for r in rows[1:])
    meta = json.loads((synth / "scenario.json").read_text())
    assert meta["novel_onsets"] == [10, 25]


def test_label_then_score_agree(synth, tmp_path, capsys):
    assert main(label_args(synth, tmp_path / "run")) == 0
    summary = json.loads((tmp_path / "run" / "summary.json").read_text())
    assert summary["metrics"]["accuracy"] >= 85
    capsys.readouterr()
    assert main(["score", "--decisions", str(tmp_path / "run" / "decisions.jsonl"),
                 "--labelspace", str(tmp_path / "run" / "labelspace.json"),
                 "--truth", str(synth / "truth.csv")]) == 0
    scored = json.loads(capsys.readouterr().out)
    assert scored["tally"] == summary["tally"] and scored["metrics"] == summary["metrics"]


def test_label_outputs_are_reproducible(synth, tmp_path):
    for name in ("a", "b"):
        assert main(label_args(synth, tmp_path / name)) == 0
    for f in ("decisions.jsonl", "summary.json", "manifest.json", "labelspace.json",
              "nl_trajectory.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_trajectory_feeds_the_simulator(synth, tmp_path, capsys):
    assert main(label_args(synth, tmp_path / "run")) == 0
    out = tmp_path / "sim.json"
    assert main(["simulate", "--trajectory", str(tmp_path / "run" / "nl_trajectory.csv"),
                 "--strategies", "ST.1,ST.6", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["ST.1"]["speedup_vs_st1"] == 1.0 and rep["ST.6"]["speedup_vs_st1"] > 1.0
    assert len(rep["ST.1"]["step_makespans"]) == 50


def test_simulate_st1_only(tmp_path):
    out = tmp_path / "r.json"
    assert main(["simulate", "--strategies", "ST.1", "--steps", "10", "--out", str(out)]) == 0
    assert list(json.loads(out.read_text())) == ["ST.1"]


def test_label_with_split_protocol(tmp_path):
    data = tmp_path / "full.csv"
    with open(data, "w") as fh:
        fh.write("id,f0,f1,label\n")
        for i in range(600):
            c = i % 5
            fh.write(f"{i},{c * 10 + (i % 7) * 0.1},{(i % 3) * 0.1},{c}\n")
    assert main(["label", "--data", str(data), "--out", str(tmp_path / "o"), "--k-per-hf", "5"]) == 0
    s = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert len(s["seed_labels"]) == 1 and s["n_labeled"] == 55 and s["n_stream"] == 545


def test_num_hf_sweep_time_increases(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--axis", "num_hf", "--values", "2,6,10,14", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    modeled = [float(r["modeled_time_s"]) for r in rows]
    assert all(b > a for a, b in zip(modeled, modeled[1:]))
    wall = [float(r["wall_time_s"]) for r in rows]
    assert wall[-1] > wall[0]


@pytest.mark.parametrize("argv,code", [
    (["simulate", "--strategies", "ST.9"], 2),
    (["sweep", "--axis", "gamma", "--values", "1"], 2),
    (["label", "--out", "x"], 2),
    (["label"], 2),
    (["nonsense"], 2),
    (["score", "--decisions", "missing.jsonl", "--labelspace", "l.json", "--truth", "t.csv"], 3),
])
def test_exit_codes(argv, code, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == code


def test_config_error_exit_code(synth, tmp_path):
    assert main(label_args(synth, tmp_path / "o", "--tau", "1.5")) == 2
    cfg = tmp_path / "c.ini"
    cfg.write_text("[ensemble]\nbogus = 1\n")
    assert main(label_args(synth, tmp_path / "o", "--config", str(cfg))) == 2


def test_data_error_exit_code(synth, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,f0,f1,label\n1,0.5,zz,0\n")
    assert main(["label", "--labeled", str(bad), "--stream", str(synth / "stream.csv"),
                 "--out", str(tmp_path / "o")]) == 3
    three_d = tmp_path / "s3.csv"
    three_d.write_text("id,f0,f1,f2,label\n9000,0,0,0,\n")
    assert main(["label", "--labeled", str(synth / "labeled.csv"), "--stream", str(three_d),
                 "--out", str(tmp_path / "o")]) == 3


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "streamlabel.cli", "simulate", "--strategies",
                        "ST.1", "--steps", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and "ST.1" in r.stdout
