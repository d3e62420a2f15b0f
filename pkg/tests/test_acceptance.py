"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS/FAIL criterion N: ...`` line; the lines are
repeated in the terminal summary.  Tolerances and runtime limits are the
published ones and are not relaxed here.
"""
import time

import numpy as np

from xtalk_lab.capacitive import CapacitanceSet, lambda_direct_matrix, photon_loss_rate
from xtalk_lab.config import data_path
from xtalk_lab.crosstalk import FLUX_SIGNED, XY_DB, CrosstalkMatrix, LinearCrosstalkModel, db_to_amplitude_ratio
from xtalk_lab.engine import SIGMA_X, SIGMA_Z, TimeDependentHamiltonian, evolve, excited_population, ground
from xtalk_lab.error_budget import (
    PROPAGATION_PHASE,
    ZERO_PHASE,
    ErrorScalingConfig,
    detuning_threshold,
    offresonant_excitation,
    simulate_gate_error,
)
from xtalk_lab.fitting import linear_fit
from xtalk_lab.flux import CouplerModel, compensation_currents, random_flux_matrix
from xtalk_lab.io import ingest_crosstalk_dataset
from xtalk_lab.lattice import build_lattice
from xtalk_lab.virtual_lab import RamseyConfig, ac_flux_calibration, measure_ac_crosstalk, measure_xy_crosstalk, restoring_slope
from xtalk_lab.virtual_lab.dc_flux import DC_BETA_FLOOR


class Clock:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_engine_oracles(criterion):
    with Clock() as clk:
        om = 2 * np.pi * 0.025
        t = np.linspace(0.0, 10 * np.pi / om, 401)
        H = TimeDependentHamiltonian(2).add(SIGMA_X, om)
        p = excited_population(evolve(H, ground(), t, 0.05, store_states=True).states)
        rabi_err = np.max(np.abs(p - np.sin(om * t) ** 2))
        worst = 0.0
        for omega, delta in [(0.1, 0.3), (0.05, 0.4), (0.2, 0.05)]:
            # generalized Rabi: the first maximum sits at pi / sqrt(omega^2 + delta^2)
            H = TimeDependentHamiltonian(2).add(SIGMA_X, omega / 2).add(SIGMA_Z, delta / 2)
            t_peak = np.pi / np.hypot(omega, delta)
            pk = excited_population(evolve(H, ground(), [0.0, t_peak], 0.01).final_state)
            worst = max(worst, abs(pk - offresonant_excitation(omega, delta)))
    ok = rabi_err <= 1e-6 and worst <= 1e-6 and clk.elapsed < 1.0
    criterion(1, ok, f"Rabi max err {rabi_err:.2e}, off-resonant peak err {worst:.2e}, {clk.elapsed:.2f} s")


def test_criterion_02_xy_round_trip(criterion):
    lams = np.random.default_rng(2024).uniform(-56.0, -27.0, 50)
    dev = build_lattice(3)
    base = dev.xy_matrix().entries
    with Clock() as clk:
        clean, noisy = [], []
        for k, lam in enumerate(lams):
            m = base.copy()
            m[0, 1] = lam
            xy = CrosstalkMatrix(XY_DB, m)
            clean.append(measure_xy_crosstalk(dev, 0, 1, xy_matrix=xy).lambda_db - lam)
            noisy.append(measure_xy_crosstalk(dev, 0, 1, xy_matrix=xy, noise_sigma=0.02, seed=k).lambda_db - lam)
    e0, e1 = np.max(np.abs(clean)), np.max(np.abs(noisy))
    ok = e0 <= 0.1 and e1 <= 0.5 and clk.elapsed < 60
    criterion(2, ok, f"worst error {e0:.2e} dB noiseless, {e1:.3f} dB noisy, {clk.elapsed:.1f} s")


def test_criterion_03_amplitude_ratios(criterion):
    hi, lo = db_to_amplitude_ratio(-27.0), db_to_amplitude_ratio(-56.0)
    ok = round(100 * hi, 2) == 4.47 and round(100 * lo, 3) == 0.158
    criterion(3, ok, f"-27 dB -> {100 * hi:.4f} %, -56 dB -> {100 * lo:.5f} %")


def test_criterion_04_offresonant_magnitude(criterion):
    parasitic = 25.0 * db_to_amplitude_ratio(-36.0)
    p = offresonant_excitation(parasitic, 420.0)
    # cross-check with the engine at the analytic peak time, in rad/ns
    om, de = 2 * np.pi * 1e-3 * parasitic, 2 * np.pi * 1e-3 * 420.0
    H = TimeDependentHamiltonian(2).add(SIGMA_X, om / 2).add(SIGMA_Z, de / 2)
    p_sim = excited_population(evolve(H, ground(), [0.0, np.pi / np.hypot(om, de)], 0.005).final_state)
    ok = 4e-7 <= p <= 2e-6 and abs(p_sim - p) < 1e-9
    criterion(4, ok, f"excitation {p:.3e} (simulated {p_sim:.3e})")


def test_criterion_05_detuning_thresholds(criterion):
    with Clock() as clk:
        d3 = detuning_threshold(-27.0, 20.0, 0.999)
        d4 = detuning_threshold(-27.0, 20.0, 0.9999)
    ok = abs(d3 - 28) <= 0.2 * 28 and abs(d4 - 42) <= 0.2 * 42 and clk.elapsed < 60
    criterion(5, ok, f"99.9 % at {d3:.2f} MHz, 99.99 % at {d4:.2f} MHz, {clk.elapsed:.1f} s")


def test_criterion_06_gate_error_scaling(criterion):
    strong, weak = LinearCrosstalkModel(-2.0, -50.0), LinearCrosstalkModel(-1.5, -45.0)

    def err(model, n, mode=ZERO_PHASE):
        return simulate_gate_error(ErrorScalingConfig(n=n, model=model, phase_mode=mode)).mean_error

    with Clock() as clk:
        e_s, e_w = err(strong, 33), err(weak, 33)
        p_s, p_w = err(strong, 33, PROPAGATION_PHASE), err(weak, 33, PROPAGATION_PHASE)
        g_s = e_s / err(strong, 21) - 1
        g_w = e_w / err(weak, 21) - 1
    checks = {
        "zero (-2,-50) error <= 3e-4": e_s <= 3e-4,
        "zero (-1.5,-45) fidelity > 99.7 %": 1 - e_w > 0.997,
        "propagation (-2,-50) fidelity >= 99.99 %": 1 - p_s >= 0.9999,
        "propagation (-1.5,-45) fidelity >= 99.95 %": 1 - p_w >= 0.9995,
        "plateau growth < 25 %": max(g_s, g_w) < 0.25,
        "runtime < 10 min": clk.elapsed < 600,
    }
    failed = [k for k, v in checks.items() if not v]
    detail = (f"zero {e_s:.3e} / {100 * (1 - e_w):.3f} %, propagation {100 * (1 - p_s):.4f} % / "
              f"{100 * (1 - p_w):.4f} %, growth {100 * g_s:.1f} % / {100 * g_w:.1f} %, {clk.elapsed:.1f} s")
    if failed:
        detail += "; failed: " + ", ".join(failed)
    criterion(6, not failed, detail)


def test_criterion_07_dc_round_trip(criterion):
    model = CouplerModel(flux_offset=-0.035)
    with Clock() as clk:
        rel = {b: abs(restoring_slope(model, b).beta_signed / b - 1) for b in (0.0044, 0.0013, 0.0001)}
        zero = restoring_slope(model, 0.0)
    ok = max(rel.values()) <= 0.05 and zero.below_floor and zero.beta < DC_BETA_FLOOR and clk.elapsed < 120
    worst = max(rel.values())
    criterion(7, ok, f"worst relative error {100 * worst:.3f} %, beta=0 reads {zero.beta:.1e}, {clk.elapsed:.1f} s")


def test_criterion_08_compensation(criterion):
    rng = np.random.default_rng(8)
    with Clock() as clk:
        true = random_flux_matrix(40, rng)
        # the compensation uses a matrix measured with 5 % relative error
        meas = true.entries * (1 + 0.05 * rng.standard_normal(true.entries.shape))
        np.fill_diagonal(meas, 1.0)
        target = rng.uniform(-0.3, 0.3, 40)
        naive = np.max(np.abs(true.entries @ target - target))
        applied = compensation_currents(CrosstalkMatrix(FLUX_SIGNED, meas), target, 1.0)
        comp = np.max(np.abs(true.entries @ applied - target))
    ratio = naive / comp
    ok = ratio >= 10 and clk.elapsed < 1.0
    criterion(8, ok, f"worst residual {naive:.2e} -> {comp:.2e} Phi0 ({ratio:.1f}x), {clk.elapsed:.3f} s")


def test_criterion_09_ac_round_trip(criterion):
    with Clock() as clk:
        cfg = RamseyConfig()
        cal = ac_flux_calibration(cfg, k_true=8.0)
        res = measure_ac_crosstalk(cfg, cal, 0.0058)
    ok = abs(cal.k / 8 - 1) <= 0.02 and abs(res.beta / 0.0058 - 1) <= 0.1 and clk.elapsed < 300
    criterion(9, ok, f"k = {cal.k:.4f}, beta_ac = {res.beta:.5f}, {clk.elapsed:.1f} s")


def test_criterion_10_dataset_reproduction(criterion):
    with Clock() as clk:
        bare = ingest_crosstalk_dataset(data_path("xy_bare_72.csv"))
        tunnel = ingest_crosstalk_dataset(data_path("xy_tunnel_72.csv"))
        fb = linear_fit(bare.distances_mm, bare.values)
        ft = linear_fit(tunnel.distances_mm, tunnel.values)
    ok = (
        abs(bare.stats.mean + 39.4) < 0.05 and abs(bare.stats.std - 3.7) < 0.05
        and abs(tunnel.stats.mean + 37.4) < 0.05 and abs(tunnel.stats.std - 3.9) < 0.05
        and abs(fb.slope + 1.1) <= fb.slope_err and abs(fb.intercept + 33.9) <= fb.intercept_err
        and abs(ft.slope + 1.0) <= ft.slope_err
        and clk.elapsed < 1.0
    )
    criterion(10, ok, f"bare {bare.stats.mean:.2f}+-{bare.stats.std:.2f} dB, tunnel {tunnel.stats.mean:.2f}+-"
                      f"{tunnel.stats.std:.2f} dB, fit ({fb.slope:.3f}+-{fb.slope_err:.3f}, "
                      f"{fb.intercept:.2f}+-{fb.intercept_err:.2f}), {clk.elapsed:.3f} s")


def test_criterion_11_capacitive_formulas(criterion):
    # 50 Ohm, 50 aF, 4 GHz, 100 fF worked by hand in SI units: 789.5683520871485 1/s
    kappa = photon_loss_rate(50.0, 0.05, 4.0, 100.0)
    anchor = abs(kappa / 7.895683520871485e-07 - 1)
    quad = max(abs(photon_loss_rate(50.0, 0.05 * a, 4.0, 100.0) / (a * a * kappa) - 1) for a in (0.1, 3.0, 17.0))
    rng = np.random.default_rng(11)
    k = rng.uniform(1e-4, 1e-2, (5, 5))
    np.fill_diagonal(k, 0.2)
    caps = CapacitanceSet(rng.uniform(80, 100, 5), k, rng.uniform(4.2, 5.0, 5))
    base = lambda_direct_matrix(caps)
    inv = max(np.nanmax(np.abs(lambda_direct_matrix(caps.scaled(a)) - base)) for a in (1e-3, 7.0, 1e3))
    ok = anchor <= 1e-10 and quad <= 1e-12 and inv <= 1e-9
    criterion(11, ok, f"kappa anchor rel err {anchor:.1e}, C^2 law err {quad:.1e}, scale invariance {inv:.1e} dB")
