"""Run configuration documents.

A config is one YAML mapping.  ``schema_version`` is required; the other
top-level keys are the shared ``device`` and ``model`` blocks, ``seed``, and
one block per command (``gate_error_scaling``, ``xy_xtalk``, ...).  Every
physical quantity carries its unit in the key name.  Unknown keys are
rejected so a misspelt parameter never silently falls back to a default.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Dict

import yaml

from .errors import ConfigurationError

SCHEMA_VERSION = 1
PACKAGE_PREFIX = "package:"
REQUIRED = object()
DEFAULT_SEED = 20240601

COMMANDS = (
    "xy-xtalk",
    "dc-flux",
    "ac-flux",
    "gate-error-scaling",
    "distance-fit",
    "ingest-stats",
    "capacitive",
)


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _list_of(pred, length=None):
    def check(v):
        return isinstance(v, list) and all(pred(x) for x in v) and (length is None or len(v) == length)

    return check


def _pair(v):
    return isinstance(v, list) and len(v) == 2 and all(_int(x) for x in v)


def _str(v):
    return isinstance(v, str)


def _bool(v):
    return isinstance(v, bool)


def _opt(pred):
    return lambda v: v is None or pred(v)


# key -> (validator, default, description of the expected type)
SCHEMA: Dict[str, Dict[str, tuple]] = {
    "device": {
        "n": (_int, 5, "integer"),
        "pitch_mm": (_num, 2.0, "number"),
        "frequencies_ghz": (_opt(_list_of(_num, 8)), None, "list of 8 numbers"),
    },
    "model": {
        "m_db_per_mm": (_num, -1.1, "number"),
        "lambda0_db": (_num, -33.9, "number"),
    },
    "gate_error_scaling": {
        "n_list": (_list_of(_int), REQUIRED, "list of odd integers"),
        "m_db_per_mm": (_num, REQUIRED, "number"),
        "lambda0_db": (_num, REQUIRED, "number"),
        "phase_mode": (_str, "zero_phase", "zero_phase | propagation_phase | random_phase"),
        "gate_time_ns": (_num, 20.0, "number"),
        "pulse_shape": (_str, "sine", "sine | square"),
        "step_ns": (_num, 0.125, "number"),
        "exclude_resonant": (_bool, False, "boolean"),
    },
    "xy_xtalk": {
        "pairs": (_opt(_list_of(_pair)), None, "list of [victim, source]"),
        "amplitude_grid_v": (_list_of(_num), [5.0, 10.0, 15.0, 20.0], "list of numbers"),
        "self_amplitude_grid_v": (_list_of(_num), [0.25, 0.5, 0.75, 1.0], "list of numbers"),
        "noise_sigma": (_num, 0.0, "number"),
        "drive_gain_mhz_per_v": (_num, 25.0, "number"),
        "decay_time_ns": (_num, 1e4, "number"),
        "n_points": (_int, 401, "integer"),
    },
    "dc_flux": {
        "qubit_frequency_ghz": (_num, 4.2, "number"),
        "omega_c0_ghz": (_num, 7.9, "number"),
        "g_mhz": (_num, 50.0, "number"),
        "flux_offset_phi0": (_num, 0.0, "number"),
        "mutual_ma_per_phi0": (_num, 3.0, "number"),
        "linewidth_mhz": (_num, 2.0, "number"),
        "beta_list": (_list_of(_num), [0.0044, 0.0013, 0.0001, 0.0], "list of numbers"),
        "source_fluxes_phi0": (_list_of(_num), [-1.0, 0.0, 1.0], "list of numbers"),
        "probe_detuning_mhz": (_num, 10.0, "number"),
        "tol_phi0": (_num, 1e-6, "number"),
        "flux_noise_phi0": (_num, 0.0, "number"),
    },
    "ac_flux": {
        "qubit_frequency_ghz": (_num, 4.2, "number"),
        "omega_c0_ghz": (_num, 7.9, "number"),
        "g_mhz": (_num, 50.0, "number"),
        "dc_bias_phi0": (_num, 0.3, "number"),
        "ac_frequency_ghz": (_num, 0.2, "number"),
        "drive_detuning_mhz": (_num, 10.0, "number"),
        "pulse_ns": (_num, 10.0, "number"),
        "idle_stop_ns": (_num, 1000.0, "number"),
        "idle_step_ns": (_num, 5.0, "number"),
        "step_ns": (_num, 0.05, "number"),
        "k_true_v_per_phi0": (_num, 8.0, "number"),
        "voltage_grid_v": (_list_of(_num), [0.05 * k for k in range(9)], "list of numbers"),
        "flux_grid_phi0": (_list_of(_num), [0.0025 * k for k in range(25)], "list of numbers"),
        "beta_list": (_list_of(_num), [0.0058], "list of numbers"),
        "bias_amplitude_phi0": (_num, 0.05, "number"),
        "source_amplitude_phi0": (_num, 0.5, "number"),
        "n_phase": (_int, 13, "integer"),
        "noise_sigma": (_num, 0.0, "number"),
    },
    "distance_fit": {
        "dataset": (_str, REQUIRED, "path"),
        "bin_width_db": (_num, 2.0, "number"),
    },
    "ingest_stats": {
        "dataset": (_str, REQUIRED, "path"),
        "bin_width": (_opt(_num), None, "number"),
    },
    "capacitive": {
        "coupling_csv": (_str, REQUIRED, "path"),
        "self_csv": (_str, REQUIRED, "path"),
        "z_ohm": (_num, 50.0, "number"),
        "bin_width_db": (_num, 5.0, "number"),
    },
}

TOP_LEVEL = {"schema_version", "seed", *SCHEMA}


def data_path(name: str) -> Path:
    """Location of a bundled dataset."""
    return Path(str(resources.files("xtalk_lab") / "data" / name))


def section_name(command: str) -> str:
    return command.replace("-", "_")


@dataclass(frozen=True)
class RunConfig:
    command: str
    sections: Dict[str, Dict[str, Any]]
    seed: int
    sha256: str
    base_dir: Path

    def __getitem__(self, name: str) -> Dict[str, Any]:
        return self.sections[name]

    @property
    def block(self) -> Dict[str, Any]:
        return self.sections[section_name(self.command)]

    def path(self, value: str) -> Path:
        """Resolve a path from the document relative to the config file.

        ``package:<name>`` refers to a dataset shipped with the toolkit.
        """
        if value.startswith(PACKAGE_PREFIX):
            return data_path(value[len(PACKAGE_PREFIX):])
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p


def _resolve(name: str, given: Any) -> Dict[str, Any]:
    schema = SCHEMA[name]
    if given is None:
        given = {}
    if not isinstance(given, dict):
        raise ConfigurationError(f"'{name}' must be a mapping")
    unknown = sorted(set(given) - set(schema))
    if unknown:
        raise ConfigurationError(f"unknown key(s) in '{name}': {', '.join(unknown)}")
    out = {}
    for key, (check, default, desc) in schema.items():
        if key in given:
            val = given[key]
            if not check(val):
                raise ConfigurationError(f"'{name}.{key}' must be a {desc}, got {val!r}")
            out[key] = val
        elif default is REQUIRED:
            raise ConfigurationError(f"missing required key '{name}.{key}'")
        else:
            out[key] = default
    return out


def parse_config(text: str, command: str, base_dir: Path = Path(".")) -> RunConfig:
    """Validate a YAML document for ``command`` and fill in defaults."""
    if command not in COMMANDS:
        raise ConfigurationError(f"unknown command {command!r}")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("config must be a mapping at the top level")
    unknown = sorted(set(doc) - TOP_LEVEL)
    if unknown:
        raise ConfigurationError(f"unknown top-level key(s): {', '.join(unknown)}")
    if "schema_version" not in doc:
        raise ConfigurationError("missing required key 'schema_version'")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported schema_version {doc['schema_version']!r}; expected {SCHEMA_VERSION}")
    seed = doc.get("seed", DEFAULT_SEED)
    if not _int(seed) or not 0 <= seed < 2**64:
        raise ConfigurationError("'seed' must be an integer in [0, 2**64)")
    sect = section_name(command)
    sections = {name: _resolve(name, doc.get(name)) for name in ("device", "model")}
    sections[sect] = _resolve(sect, doc.get(sect))
    # other command blocks may be present; they are still validated
    for name in SCHEMA:
        if name not in sections and name in doc:
            _resolve_partial(name, doc[name])
    digest = hashlib.sha256(text.encode()).hexdigest()
    return RunConfig(command, sections, int(seed), digest, Path(base_dir))


def _resolve_partial(name: str, given: Any):
    if not isinstance(given, dict):
        raise ConfigurationError(f"'{name}' must be a mapping")
    unknown = sorted(set(given) - set(SCHEMA[name]))
    if unknown:
        raise ConfigurationError(f"unknown key(s) in '{name}': {', '.join(unknown)}")


def load_config(path, command: str) -> RunConfig:
    path = Path(path)
    text = path.read_text()
    return parse_config(text, command, path.resolve().parent)
