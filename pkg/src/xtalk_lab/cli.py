"""Command line entry point: ``xtalk-lab <command> --config <path> [--out <dir>] [--threads <k>]``.

Each run writes a result bundle (CSV data, SVG figures, the config copy and
``manifest.json``) into a temporary sibling of the output directory and
renames it into place only when everything succeeded.

Exit codes: 0 success, 2 bad config or parameters, 3 physics or fit
failure, 4 I/O or dataset problem.  Errors are printed to stderr as one
JSON object.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import shutil
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .capacitive import lambda_direct_matrix, load_capacitance_set
from .config import COMMANDS, RunConfig, load_config
from .crosstalk import LinearCrosstalkModel
from .error_budget import ErrorScalingConfig, simulate_gate_error
from .errors import (
    ConfigurationError,
    ContractViolation,
    DatasetError,
    FitError,
    MeasurementError,
    NumericalError,
)
from .fitting import aggregate_stats, linear_fit
from .flux import CouplerModel
from .io import DB, fmt, ingest_crosstalk_dataset, per_distance_means, write_csv
from .lattice import FrequencyPlan, build_lattice
from .plotting import ERROR_VS_N, HISTOGRAM, SCATTER, SPECTROSCOPY, emit_plot
from .virtual_lab import (
    RamseyConfig,
    ac_flux_calibration,
    dc_flux_spectroscopy,
    measure_ac_crosstalk,
    measure_xy_crosstalk,
    restoring_slope,
)
from .virtual_lab.dc_flux import DC_BETA_FLOOR

EXIT_OK, EXIT_SCHEMA, EXIT_PHYSICS, EXIT_IO = 0, 2, 3, 4
OUT_ENV = "XTALK_LAB_OUT"


def _seeds(seed: int, n: int):
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def _plan(cfg: RunConfig):
    f = cfg["device"]["frequencies_ghz"]
    return FrequencyPlan() if f is None else FrequencyPlan.from_sequence(f)


def _model(block) -> LinearCrosstalkModel:
    return LinearCrosstalkModel(block["m_db_per_mm"], block["lambda0_db"])


class Runner:
    """Executes one command into a working directory."""

    def __init__(self, cfg: RunConfig, workdir: Path, threads: int = 1):
        self.cfg = cfg
        self.dir = workdir
        self.threads = max(1, int(threads))
        self.files = []

    def map(self, fn, items):
        """Ordered map, fanned out over the worker pool when ``threads > 1``."""
        items = list(items)
        if self.threads == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.threads) as pool:
            return list(pool.map(fn, items))

    def csv(self, name, header, rows, comments=None):
        write_csv(self.dir / name, header, rows, comments)
        self.files.append(name)

    def plot(self, data, kind, name, title=None):
        emit_plot(data, kind, self.dir / name, config_hash=self.cfg.sha256, title=title)
        self.files.append(name)

    # commands -----------------------------------------------------------

    def gate_error_scaling(self):
        b = self.cfg.block
        dev = self.cfg["device"]
        base = ErrorScalingConfig(
            model=_model(b),
            phase_mode=b["phase_mode"],
            gate_time=float(b["gate_time_ns"]),
            pulse_shape=b["pulse_shape"],
            step=float(b["step_ns"]),
            frequencies=_plan(self.cfg),
            pitch=float(dev["pitch_mm"]),
            exclude_resonant=b["exclude_resonant"],
            seed=self.cfg.seed,
        )
        n_list = sorted(b["n_list"])
        configs = []
        for n in n_list:
            c = replace(base, n=n)
            c.validate()
            configs.append(c)
        results = self.map(simulate_gate_error, configs)
        self.csv(
            "gate_error_scaling.csv",
            ["n_qubits", "m_dB_per_mm", "lambda0_dB", "phase_mode", "mean_error"],
            [(r.n_qubits, b["m_db_per_mm"], b["lambda0_db"], b["phase_mode"], r.mean_error) for r in results],
        )
        labels = results[0].subgroups
        self.csv(
            "gate_error_by_subgroup.csv",
            ["n_qubits", *[f"error_{s}" for s in labels]],
            [(r.n_qubits, *r.errors) for r in results],
        )
        label = f"m={b['m_db_per_mm']} dB/mm, L0={b['lambda0_db']} dB, {b['phase_mode']}"
        self.plot(
            {"series": {label: ([r.n_qubits for r in results], [r.mean_error for r in results])}},
            ERROR_VS_N,
            "error_vs_n.svg",
        )
        return {"mean_error": {str(r.n_qubits): r.mean_error for r in results}}

    def xy_xtalk(self):
        b = self.cfg.block
        dev = self.cfg["device"]
        device = build_lattice(dev["n"], float(dev["pitch_mm"]), _plan(self.cfg), xy_model=_model(self.cfg["model"]))
        pairs = b["pairs"]
        if pairs is None:
            c = device.center_index()
            pairs = [[c, j] for j in range(device.num_qubits) if j != c]
        pairs = [tuple(p) for p in pairs]
        seeds = _seeds(self.cfg.seed, len(pairs))
        kw = dict(
            amplitude_grid=b["amplitude_grid_v"],
            self_amplitude_grid=b["self_amplitude_grid_v"],
            noise_sigma=float(b["noise_sigma"]),
            drive_gain=float(b["drive_gain_mhz_per_v"]),
            decay_time=float(b["decay_time_ns"]),
            n_points=b["n_points"],
        )

        def one(job):
            (v, s), seed = job
            return measure_xy_crosstalk(device, v, s, seed=seed, **kw)

        results = self.map(one, zip(pairs, seeds))
        dist = [device.distance(v, s) for v, s in pairs]
        self.csv(
            "xy_crosstalk.csv",
            ["victim", "source", "value", "unit", "distance_mm"],
            [(r.victim, r.source, r.lambda_db, DB, d) for r, d in zip(results, dist)],
        )
        self.csv(
            "xy_crosstalk_details.csv",
            ["victim", "source", "distance_mm", "injected_dB", "measured_dB", "measured_err_dB",
             "cross_slope_MHz_per_V", "self_slope_MHz_per_V", "seed"],
            [
                (r.victim, r.source, d, device.xy_crosstalk_db(r.victim, r.source), r.lambda_db,
                 r.lambda_err_db, r.cross.slope_mhz_per_v, r.self_.slope_mhz_per_v, s)
                for r, d, s in zip(results, dist, seeds)
            ],
        )
        off = [(d, r.lambda_db) for r, d in zip(results, dist) if d > 0]
        summary = {"pairs": len(results)}
        if off:
            d, v = map(np.asarray, zip(*off))
            fit = linear_fit(d, v) if np.ptp(d) > 0 else None
            self.plot(
                {"distance_mm": d, "values_db": v, "fit": None if fit is None else (fit.slope, fit.intercept)},
                SCATTER,
                "xy_crosstalk_vs_distance.svg",
            )
            summary["mean_dB"] = float(v.mean())
            if fit is not None:
                summary.update(m_dB_per_mm=fit.slope, lambda0_dB=fit.intercept)
        return summary

    def dc_flux(self):
        b = self.cfg.block
        model = CouplerModel(
            omega_c0=float(b["omega_c0_ghz"]),
            g=float(b["g_mhz"]),
            flux_offset=float(b["flux_offset_phi0"]),
            mutual_current_per_phi0=float(b["mutual_ma_per_phi0"]),
        )
        fq = float(b["qubit_frequency_ghz"])
        spec_seed, *seeds = _seeds(self.cfg.seed, 1 + len(b["beta_list"]))
        spec = dc_flux_spectroscopy(model, fq, linewidth_mhz=float(b["linewidth_mhz"]), seed=spec_seed)
        self.csv(
            "dc_spectroscopy.csv",
            ["crossing_current_mA"],
            [(c,) for c in spec.crossing_currents_ma],
            comments={"period_mA": fmt(spec.period_ma), "offset_phi0": fmt(spec.offset_phi0)},
        )
        self.plot(
            {"currents_ma": spec.currents_ma, "probe_ghz": spec.probe_ghz, "response": spec.response,
             "crossings_ma": spec.crossing_currents_ma},
            SPECTROSCOPY,
            "dc_spectroscopy.svg",
        )
        # the restoring step works on the calibrated model
        cal = CouplerModel(omega_c0=model.omega_c0, g=model.g, flux_offset=spec.offset_phi0,
                           mutual_current_per_phi0=spec.period_ma)

        def one(job):
            beta, seed = job
            return restoring_slope(cal, beta, fq, b["source_fluxes_phi0"], float(b["probe_detuning_mhz"]),
                                   float(b["tol_phi0"]), float(b["flux_noise_phi0"]), seed)

        results = self.map(one, zip(b["beta_list"], seeds))
        self.csv(
            "dc_flux.csv",
            ["beta_injected", "beta_measured", "beta_signed", "beta_err", "below_floor", "bias_flux_phi0", "probe_GHz"],
            [(bi, r.beta, r.beta_signed, r.beta_err, r.below_floor, r.bias_flux, r.probe_ghz)
             for bi, r in zip(b["beta_list"], results)],
            comments={"floor": fmt(DC_BETA_FLOOR)},
        )
        self.csv(
            "dc_restoring_points.csv",
            ["beta_injected", "source_flux_phi0", "restoring_flux_phi0"],
            [(bi, s, x) for bi, r in zip(b["beta_list"], results) for s, x in zip(r.source_fluxes, r.restoring_fluxes)],
        )
        return {"period_mA": spec.period_ma, "offset_phi0": spec.offset_phi0,
                "beta": [r.beta for r in results]}

    def ac_flux(self):
        b = self.cfg.block
        config = RamseyConfig(
            qubit_frequency=float(b["qubit_frequency_ghz"]),
            coupler=CouplerModel(omega_c0=float(b["omega_c0_ghz"]), g=float(b["g_mhz"])),
            dc_bias=float(b["dc_bias_phi0"]),
            ac_frequency=float(b["ac_frequency_ghz"]),
            drive_detuning_mhz=float(b["drive_detuning_mhz"]),
            pulse_ns=float(b["pulse_ns"]),
            idle_times=tuple(np.arange(0.0, b["idle_stop_ns"] + 1e-9, b["idle_step_ns"])),
            step=float(b["step_ns"]),
            phase_offsets=tuple(np.linspace(0.0, 3.0 * np.pi, b["n_phase"])),
        )
        config.validate()
        cal_seed, *seeds = _seeds(self.cfg.seed, 1 + len(b["beta_list"]))
        cal = ac_flux_calibration(config, b["voltage_grid_v"], float(b["k_true_v_per_phi0"]),
                                  b["flux_grid_phi0"], float(b["noise_sigma"]), cal_seed)
        self.csv(
            "ac_calibration.csv",
            ["voltage_V", "fringe_MHz", "mapped_flux_phi0"],
            zip(cal.voltages, cal.measured_mhz, cal.mapped_flux),
            comments={"k_V_per_phi0": fmt(cal.k), "k_err": fmt(cal.k_err)},
        )

        def one(job):
            beta, seed = job
            return measure_ac_crosstalk(config, cal, beta, float(b["bias_amplitude_phi0"]),
                                        float(b["source_amplitude_phi0"]), float(b["noise_sigma"]), seed)

        results = self.map(one, zip(b["beta_list"], seeds))
        self.csv(
            "ac_flux.csv",
            ["beta_injected", "beta_measured", "upper_bound", "swing_MHz", "resolution_MHz", "gamma_phi0_per_MHz"],
            [(bi, r.beta, r.upper_bound, r.swing_mhz, r.resolution_mhz, r.gamma_phi0_per_mhz)
             for bi, r in zip(b["beta_list"], results)],
        )
        self.csv(
            "ac_fringe_vs_phase.csv",
            ["beta_injected", "dtheta_rad", "fringe_MHz"],
            [(bi, p, f) for bi, r in zip(b["beta_list"], results) for p, f in zip(r.phase_offsets, r.fringe_mhz)],
        )
        return {"k_V_per_phi0": cal.k, "beta": [r.beta for r in results]}

    def _dataset(self, key, bin_width):
        return ingest_crosstalk_dataset(self.cfg.path(self.cfg.block[key]), bin_width)

    def distance_fit(self):
        b = self.cfg.block
        ds = self._dataset("dataset", b["bin_width_db"])
        if ds.distances_mm is None:
            raise DatasetError("distance-fit needs a distance_mm column")
        if ds.unit != DB:
            raise DatasetError("distance-fit works on dB crosstalk")
        fit = linear_fit(ds.distances_mm, ds.values)
        self.csv(
            "distance_fit.csv",
            ["parameter", "value", "stderr"],
            [("m_dB_per_mm", fit.slope, fit.slope_err), ("lambda0_dB", fit.intercept, fit.intercept_err),
             ("residual_rms_dB", fit.residual_rms, "")],
        )
        u, m, n = per_distance_means(ds.distances_mm, ds.values)
        self.csv("mean_vs_distance.csv", ["distance_mm", "mean_dB", "count"], zip(u, m, n))
        self.plot({"distance_mm": ds.distances_mm, "values_db": ds.values, "fit": (fit.slope, fit.intercept)},
                  SCATTER, "crosstalk_vs_distance.svg")
        return {"m_dB_per_mm": fit.slope, "lambda0_dB": fit.intercept,
                "m_err": fit.slope_err, "lambda0_err": fit.intercept_err}

    def _stats_out(self, values, unit, bin_width, prefix):
        st = aggregate_stats(values, bin_width)
        self.csv(f"{prefix}_stats.csv", ["mean", "std", "count", "unit"], [(st.mean, st.std, st.count, unit)])
        self.csv(f"{prefix}_histogram.csv", ["bin_low", "bin_high", "count"],
                 zip(st.edges[:-1], st.edges[1:], st.counts))
        self.plot({"values": values, "bin_width": bin_width, "unit": unit}, HISTOGRAM, f"{prefix}_histogram.svg")
        return {"mean": st.mean, "std": st.std, "count": st.count, "unit": unit}

    def ingest_stats(self):
        ds = self._dataset("dataset", self.cfg.block["bin_width"])
        width = float(ds.stats.edges[1] - ds.stats.edges[0])
        return self._stats_out(ds.values, ds.unit, width, "crosstalk")

    def capacitive(self):
        b = self.cfg.block
        caps = load_capacitance_set(self.cfg.path(b["coupling_csv"]), self.cfg.path(b["self_csv"]), float(b["z_ohm"]))
        lam = lambda_direct_matrix(caps)
        labels = caps.labels or tuple(range(caps.size))
        rows = [(labels[i], labels[j], lam[i, j], DB)
                for i in range(caps.size) for j in range(caps.size) if i != j and np.isfinite(lam[i, j])]
        if not rows:
            raise DatasetError("no coupled qubit pairs in the capacitance data")
        self.csv("lambda_direct.csv", ["victim", "source", "value", "unit"], rows)
        return self._stats_out(np.array([r[2] for r in rows]), DB, float(b["bin_width_db"]), "lambda_direct")


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ConfigurationError, ContractViolation)):
        return EXIT_SCHEMA
    if isinstance(exc, (FitError, MeasurementError, NumericalError)):
        return EXIT_PHYSICS
    if isinstance(exc, (DatasetError, OSError)):
        return EXIT_IO
    return EXIT_PHYSICS


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run(command: str, config_path, out_dir, threads: int = 1) -> Path:
    """Run ``command`` and publish its bundle at ``out_dir``; returns that path."""
    started = _now()
    config_path = Path(config_path)
    cfg = load_config(config_path, command)
    out = Path(out_dir).resolve()
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    os.chmod(tmp, 0o755)
    try:
        runner = Runner(cfg, tmp, threads)
        summary = getattr(runner, command.replace("-", "_"))()
        shutil.copyfile(config_path, tmp / "config.yaml")
        files = {name: hashlib.sha256((tmp / name).read_bytes()).hexdigest() for name in runner.files}
        manifest = {
            "command": command,
            "config_sha256": cfg.sha256,
            "toolkit_version": __version__,
            "seed": cfg.seed,
            "threads": runner.threads,
            "started_utc": started,
            "finished_utc": _now(),
            "files": files,
            "summary": summary,
        }
        (tmp / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float) + "\n")
        if out.exists():
            old = Path(tempfile.mkdtemp(prefix=f".{out.name}.old.", dir=out.parent))
            os.replace(out, old / "bundle")
            os.replace(tmp, out)
            shutil.rmtree(old, ignore_errors=True)
        else:
            os.replace(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xtalk-lab", description="Virtual crosstalk characterisation toolkit.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="YAML run configuration")
    p.add_argument("--out", default=None, help=f"bundle directory (default ${OUT_ENV} or ./xtalk-lab-out/<command>)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for independent sweep points")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out or os.environ.get(OUT_ENV) or str(Path("xtalk-lab-out") / args.command)
    try:
        if args.threads < 1:
            raise ConfigurationError("--threads must be at least 1")
        path = run(args.command, args.config, out, args.threads)
    except Exception as exc:  # noqa: BLE001
        code = _exit_code(exc)
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code, "command": args.command}
        diag = getattr(exc, "diagnostics", None)
        if diag:
            err["diagnostics"] = diag
        print(json.dumps(err, default=str), file=sys.stderr)
        return code
    print(str(path))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
