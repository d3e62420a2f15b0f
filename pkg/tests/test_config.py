import pytest

from xtalk_lab.config import COMMANDS, DEFAULT_SEED, SCHEMA, data_path, parse_config
from xtalk_lab.errors import ConfigurationError

GATE = """
schema_version: 1
gate_error_scaling:
  n_list: [5, 9]
  m_db_per_mm: -2
  lambda0_db: -50
"""


def test_defaults_are_filled():
    cfg = parse_config(GATE, "gate-error-scaling")
    assert cfg.seed == DEFAULT_SEED
    assert cfg.block["phase_mode"] == "zero_phase"
    assert cfg["device"]["pitch_mm"] == 2.0
    assert len(cfg.sha256) == 64


def test_hash_tracks_text():
    assert parse_config(GATE, "gate-error-scaling").sha256 != parse_config(GATE + "\n", "gate-error-scaling").sha256


@pytest.mark.parametrize(
    "text,needle",
    [
        (GATE.replace("schema_version: 1", "schema_version: 2"), "schema_version"),
        (GATE.replace("schema_version: 1\n", ""), "schema_version"),
        (GATE + "  typo_key: 3\n", "typo_key"),
        (GATE.replace("  lambda0_db: -50\n", ""), "lambda0_db"),
        (GATE.replace("-50", "'-50'"), "lambda0_db"),
        (GATE + "bogus: 1\n", "bogus"),
        (GATE + "seed: -1\n", "seed"),
        (GATE + "xy_xtalk:\n  noise: 0.1\n", "noise"),
        ("[1, 2]", "mapping"),
        ("a: [", "YAML"),
    ],
)
def test_schema_violations(text, needle):
    with pytest.raises(ConfigurationError, match=needle):
        parse_config(text, "gate-error-scaling")


def test_unknown_command():
    with pytest.raises(ConfigurationError):
        parse_config(GATE, "frobnicate")


def test_every_command_has_a_block():
    assert {c.replace("-", "_") for c in COMMANDS} <= set(SCHEMA)


def test_paths(tmp_path):
    cfg = parse_config("schema_version: 1\ningest_stats:\n  dataset: x.csv\n", "ingest-stats", tmp_path)
    assert cfg.path(cfg.block["dataset"]) == tmp_path / "x.csv"
    assert cfg.path("package:xy_bare_72.csv") == data_path("xy_bare_72.csv")
    assert data_path("xy_bare_72.csv").exists()


def test_shipped_example_configs_validate():
    from pathlib import Path

    from xtalk_lab.config import load_config

    root = Path(__file__).resolve().parents[1] / "configs"
    for command in COMMANDS:
        cfg = load_config(root / f"{command.replace('-', '_')}.yaml", command)
        assert cfg.command == command
