import json
import subprocess
import sys

import pytest

from xtalk_lab.cli import EXIT_IO, EXIT_OK, EXIT_PHYSICS, EXIT_SCHEMA, OUT_ENV, main
from xtalk_lab.io import read_csv

GATE = """schema_version: 1
seed: 11
gate_error_scaling:
  n_list: [5, 9, 13]
  m_db_per_mm: -2
  lambda0_db: -50
"""

STATS = "schema_version: 1\ningest_stats:\n  dataset: package:xy_bare_72.csv\n"


def write(tmp_path, text, name="c.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def csv_bytes(out):
    return {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}


def test_gate_error_scaling_bundle(tmp_path):
    cfg = write(tmp_path, GATE)
    assert main(["gate-error-scaling", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    out = tmp_path / "o"
    _, rows = read_csv(out / "gate_error_scaling.csv")
    assert [int(r["n_qubits"]) for r in rows] == [25, 81, 169]
    errs = [float(r["mean_error"]) for r in rows]
    assert errs == sorted(errs) and errs[0] > 0
    assert (out / "error_vs_n.svg").exists()
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "gate-error-scaling" and man["seed"] == 11
    assert set(man["files"]) >= {"gate_error_scaling.csv", "error_vs_n.svg"}
    assert (out / "config.yaml").read_text() == GATE
    assert f"config_sha256={man['config_sha256']}" in (out / "error_vs_n.svg").read_text()


def test_ingest_stats_echoes_header(tmp_path):
    cfg = write(tmp_path, STATS)
    assert main(["ingest-stats", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    meta, rows = read_csv(tmp_path / "o" / "crosstalk_stats.csv")
    row = rows[0]
    assert float(row["mean"]) == pytest.approx(-39.4, abs=0.05)
    assert float(row["std"]) == pytest.approx(3.7, abs=0.05)
    assert int(row["count"]) == 72


def test_repeat_runs_are_byte_identical(tmp_path):
    cfg = write(tmp_path, GATE)
    main(["gate-error-scaling", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["gate-error-scaling", "--config", str(cfg), "--out", str(tmp_path / "b"), "--threads", "2"])
    assert csv_bytes(tmp_path / "a") == csv_bytes(tmp_path / "b")
    assert csv_bytes(tmp_path / "a")


def test_schema_error_writes_nothing(tmp_path, capsys):
    cfg = write(tmp_path, GATE + "  typo: 1\n")
    assert main(["gate-error-scaling", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_SCHEMA
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == EXIT_SCHEMA and "typo" in err["message"]
    assert not (tmp_path / "o").exists()
    assert [p.name for p in tmp_path.iterdir()] == ["c.yaml"]


def test_missing_required_key(tmp_path):
    cfg = write(tmp_path, "schema_version: 1\ndistance_fit: {}\n")
    assert main(["distance-fit", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_SCHEMA


def test_bad_threads(tmp_path):
    cfg = write(tmp_path, STATS)
    assert main(["ingest-stats", "--config", str(cfg), "--out", str(tmp_path / "o"), "--threads", "0"]) == EXIT_SCHEMA


def test_missing_dataset_is_io_error(tmp_path):
    cfg = write(tmp_path, "schema_version: 1\ningest_stats:\n  dataset: nope.csv\n")
    assert main(["ingest-stats", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_IO
    assert main(["ingest-stats", "--config", str(tmp_path / "absent.yaml"), "--out", str(tmp_path / "o")]) == EXIT_IO


def test_failed_fit_is_physics_error_and_keeps_old_bundle(tmp_path):
    out = tmp_path / "o"
    good = write(tmp_path, "schema_version: 1\ndistance_fit:\n  dataset: package:xy_bare_72.csv\n", "good.yaml")
    assert main(["distance-fit", "--config", str(good), "--out", str(out)]) == EXIT_OK
    before = csv_bytes(out)
    (tmp_path / "same.csv").write_text(
        "victim,source,value,unit,distance_mm\n0,1,-40,dB,2\n1,0,-41,dB,2\n2,1,-42,dB,2\n")
    bad = write(tmp_path, "schema_version: 1\ndistance_fit:\n  dataset: same.csv\n", "bad.yaml")
    assert main(["distance-fit", "--config", str(bad), "--out", str(out)]) == EXIT_PHYSICS
    assert csv_bytes(out) == before
    assert sorted(p.name for p in tmp_path.iterdir() if p.name.startswith(".")) == []


def test_distance_fit_recovers_dataset_law(tmp_path):
    cfg = write(tmp_path, "schema_version: 1\ndistance_fit:\n  dataset: package:xy_bare_72.csv\n")
    assert main(["distance-fit", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    fit = {r["parameter"]: float(r["value"]) for r in read_csv(tmp_path / "o" / "distance_fit.csv")[1]}
    assert fit["m_dB_per_mm"] == pytest.approx(-1.1, abs=0.165)
    assert fit["lambda0_dB"] == pytest.approx(-33.9, abs=0.894)


def test_out_env_override(tmp_path, monkeypatch):
    cfg = write(tmp_path, STATS)
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "env_out"))
    assert main(["ingest-stats", "--config", str(cfg)]) == EXIT_OK
    assert (tmp_path / "env_out" / "manifest.json").exists()


def test_console_entry_point(tmp_path):
    cfg = write(tmp_path, STATS)
    res = subprocess.run([sys.executable, "-m", "xtalk_lab.cli", "ingest-stats", "--config", str(cfg),
                          "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == str((tmp_path / "o").resolve())
