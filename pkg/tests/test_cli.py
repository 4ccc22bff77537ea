import json
import subprocess
import sys

from gridcache.cli import main

SMALL = ["--num-subchannels", "12", "--num-users", "6"]


def test_trial_prints_strict_json(capsys):
    assert main(["trial", *SMALL, "--seed", "2"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["seed"] == 2 and rec["violations"] == []
    assert len(rec["counts"]) == 5


def test_bool_flag_and_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"num_subchannels": 12, "num_users": 6, "download_rate_bits": 0.0}))
    assert main(["trial", "--config", str(cfg), "--fast-fading-enabled", "false"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["proposed_ongrid_w"] == 0.0 and rec["R"] == 0.0


def test_bad_config_exits_nonzero(capsys):
    assert main(["trial", "--reconstruction-degree", "5"]) == 2
    assert "reconstruction_degree exceeds num_sns" in capsys.readouterr().err


def test_sweep_outputs_are_byte_identical(tmp_path, capsys):
    args = ["sweep", *SMALL, "--snapshots", "2", "--R-values", "20e3,60e3", "--theta-values", "0,0.8",
            "--D-values", "1,2", "--modes", "cell_edge,cell_center"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "sweep.csv" in names and len(names) == 2 + 4
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_certify_and_dump_channel(tmp_path, capsys):
    assert main(["certify", "--instances", "5", "--out", str(tmp_path / "cert")]) == 0
    summary = json.loads(capsys.readouterr().out.splitlines()[-1])
    assert summary["min"] >= 1.0 - 1e-9
    out = tmp_path / "ch.csv"
    assert main(["dump-channel", "--num-subchannels", "5", "--num-users", "2", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "i,j,k,snr" and len(rows) == 1 + 5 * 5 * 2
    first = out.read_bytes()
    main(["dump-channel", "--num-subchannels", "5", "--num-users", "2", "--out", str(out)])
    assert out.read_bytes() == first


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "plain"
    blocker.write_text("x")
    assert main(["dump-channel", "--out", str(blocker / "ch.csv")]) == 2
    assert "error" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gridcache.cli", "trial", *SMALL], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["placement_mode"] == "cell_edge"
