import json
import subprocess
import sys

import pytest

from contractsched.cli import main


def test_bounds(capsys, tmp_path):
    out = tmp_path / "b.json"
    assert main(["bounds", "--k", "4", "--H", "1", "--r", "5", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["U"] == 8 and d["zeta1"] == pytest.approx(1.381966, abs=1e-6)
    assert "noisy_upper" in capsys.readouterr().out


def test_schedule_with_csv(tmp_path, capsys):
    csv_path = tmp_path / "t.csv"
    assert main(["schedule", "--mode", "noisy", "--k", "2", "--H", "1",
                 "--csv", str(csv_path)]) == 0
    plan = json.loads(capsys.readouterr().out)
    assert plan["l"] == 4 and plan["mode"] == "noisy"
    assert csv_path.read_text().startswith("member,j,length,completion_time")
    assert main(["schedule", "--mode", "rft", "--r", "8", "--p", "2", "--f", "1"]) == 0


def test_simulate_report_csv_and_plot(tmp_path):
    report, rec, fig = tmp_path / "r.json", tmp_path / "r.csv", tmp_path / "r.png"
    code = main(["simulate", "--scenario", "noisy", "--k", "4", "--H", "1", "--t-grid", "100",
                 "--seed", "1", "--out", str(report), "--csv", str(rec), "--plot", str(fig)])
    assert code == 0
    assert json.loads(report.read_text())["config"]["seeds"] == [1]
    assert rec.read_text().startswith("log_T,T,prior,member,ratio")
    assert fig.stat().st_size > 0


def test_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": "rft", "r": 6, "p": 3, "f": 1}))
    assert main(["--config", str(cfg), "simulate"]) == 0
    cfg.write_text("[1, 2]")
    assert main(["--config", str(cfg), "simulate"]) == 2


def test_config_errors_exit_2(capsys):
    assert main(["simulate", "--scenario", "noisy", "--k", "4", "--H", "3"]) == 2
    assert main(["bounds", "--k", "2", "--r", "3"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["--config", "/nonexistent.json", "bounds"]) == 2


def test_game_and_replay(tmp_path):
    tr = tmp_path / "t.jsonl"
    assert main(["game", "--k", "4", "--H", "1", "--mode", "scripted", "--target", "5",
                 "--lies", "0", "--out", str(tr)]) == 0
    assert main(["game", "--k", "4", "--H", "1", "--replay", str(tr)]) == 0
    lines = tr.read_text().splitlines()
    last = json.loads(lines[-1])
    last["output"] = (last["output"] + 1) % 16
    lines[-1] = json.dumps(last)
    tr.write_text("\n".join(lines) + "\n")
    assert main(["game", "--k", "4", "--H", "1", "--replay", str(tr)]) == 1
    assert main(["game", "--k", "5", "--H", "1", "--mode", "adversarial"]) == 0
    assert main(["game", "--k", "3", "--mode", "random", "--target", "2", "--seed", "4"]) == 0
    assert main(["game", "--k", "3"]) == 2


def test_verify_subset(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--tags", "Prop1", "Thm-zetas", "--out", str(out)]) == 0
    assert set(json.loads(out.read_text())["tags"]) == {"Prop1", "Thm-zetas"}


def test_table(tmp_path):
    csv_path, fig = tmp_path / "t.csv", tmp_path / "t.png"
    assert main(["table", "--csv", str(csv_path), "--plot", str(fig)]) == 0
    assert csv_path.read_text().startswith("k,tau,H")
    assert fig.exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "contractsched", "bounds", "--k", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "noisy_upper" in proc.stdout
