"""dc-flux calibration and crosstalk through qubit-coupler avoided crossings.

A qubit next to a tunable coupler is probed while the coupler bias current is
swept.  Where the coupler crosses the qubit the spectral line splits by
``2 g``; the crossing currents give the current per flux quantum and the
flux offset.  The crosstalk protocol parks the dressed qubit line on a probe
frequency close to a crossing and measures which victim current restores it
as the source line is stepped.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from ..errors import CalibrationError, ContractViolation, MeasurementError
from ..fitting import linear_fit
from ..flux import CouplerModel, coupler_frequency, hybridized_frequencies, qubit_participation, squid_frequency
from ..lattice import LatticeDevice
from ..units import mhz_to_ghz

DEFAULT_LINEWIDTH_MHZ = 2.0
DEFAULT_PROBE_DETUNING_MHZ = 10.0
# smallest |beta| the protocol claims to resolve
DC_BETA_FLOOR = 3e-5


def dressed_lines(model: CouplerModel, qubit_frequency: float, current_ma):
    """Dressed (lower, upper) frequencies and their qubit weights at bias currents."""
    phi = np.asarray(current_ma, dtype=float) / model.mutual_current_per_phi0
    wc = coupler_frequency(model, phi)
    lo, hi = hybridized_frequencies(qubit_frequency, wc, model.g)
    w_lo, w_hi = qubit_participation(qubit_frequency, wc, model.g)
    return lo, hi, w_lo, w_hi


@dataclass
class SpectroscopyResult:
    currents_ma: np.ndarray
    probe_ghz: np.ndarray
    #: response, shape (currents, probe frequencies)
    response: np.ndarray
    crossing_currents_ma: np.ndarray
    period_ma: float
    offset_phi0: float
    qubit_line_ghz: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def mutual_current_per_phi0(self) -> float:
        return self.period_ma


def spectroscopy_map(
    model: CouplerModel,
    qubit_frequency: float,
    currents_ma,
    probe_ghz,
    linewidth_mhz: float = DEFAULT_LINEWIDTH_MHZ,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> np.ndarray:
    """Lorentzian response of both dressed lines, weighted by qubit participation."""
    lo, hi, w_lo, w_hi = dressed_lines(model, qubit_frequency, currents_ma)
    f = np.asarray(probe_ghz, dtype=float)[None, :]
    hw = mhz_to_ghz(linewidth_mhz)

    def lorentz(c):
        return 1.0 / (1.0 + ((f - np.asarray(c)[:, None]) / hw) ** 2)

    resp = np.asarray(w_lo)[:, None] * lorentz(lo) + np.asarray(w_hi)[:, None] * lorentz(hi)
    if noise_sigma > 0:
        resp = resp + np.random.default_rng(seed).normal(0.0, noise_sigma, size=resp.shape)
    return resp


def _noise_level(col: np.ndarray) -> float:
    """Robust white-noise estimate from point-to-point differences."""
    return float(np.median(np.abs(np.diff(col))) / (0.6745 * np.sqrt(2.0)))


def _column_peaks(f: np.ndarray, col: np.ndarray, rel_height: float, noise: float = 0.0):
    """Sub-grid peak positions and heights in one spectrum, tallest first.

    Peaks must reach ``5 * noise`` and rise ``8 * noise`` above the
    neighbouring troughs (prominence is trough to peak, so it needs the
    larger margin).
    """
    idx, props = find_peaks(col, height=max(rel_height * col.max(), 5.0 * noise), prominence=8.0 * noise)
    out = []
    for k in idx:
        if 0 < k < f.size - 1:
            y0, y1, y2 = col[k - 1], col[k], col[k + 1]
            den = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
            out.append((f[k] + shift * (f[1] - f[0]), y1))
        else:
            out.append((f[k], col[k]))
    out.sort(key=lambda p: -p[1])
    return out


def _crossings(currents: np.ndarray, sep: np.ndarray, window: float) -> np.ndarray:
    """Vertices of quadratic fits to ``sep**2`` around each deep minimum.

    Only dips whose prominence is a quarter of the separation range count,
    so jitter of the weak line does not create extra crossings.
    """
    finite = np.isfinite(sep)
    if finite.sum() < 3:
        return np.empty(0)
    top = np.max(sep[finite])
    filled = np.where(finite, sep, top)
    idx, _ = find_peaks(-filled, prominence=0.25 * (top - np.min(sep[finite])))
    n = currents.size
    out = []
    for k in idx:
        lim = window * sep[k]
        lo = k
        while lo > 0 and finite[lo - 1] and sep[lo - 1] <= lim:
            lo -= 1
        hi = k
        while hi < n - 1 and finite[hi + 1] and sep[hi + 1] <= lim:
            hi += 1
        if hi - lo >= 2:
            x = currents[lo:hi + 1]
            c2, c1, _ = np.polyfit(x - currents[k], sep[lo:hi + 1] ** 2, 2)
            if c2 > 0:
                out.append(currents[k] - 0.5 * c1 / c2)
    return np.asarray(out)


def dc_flux_spectroscopy(
    model: CouplerModel,
    qubit_frequency: float,
    currents_ma: Optional[Sequence[float]] = None,
    probe_ghz: Optional[Sequence[float]] = None,
    linewidth_mhz: float = DEFAULT_LINEWIDTH_MHZ,
    noise_sigma: float = 0.0,
    seed: int = 0,
    rel_height: float = 1e-3,
    fit_window: float = 2.5,
) -> SpectroscopyResult:
    """Sweep the coupler current, locate avoided crossings, infer period and offset.

    The two tallest peaks of each spectrum give the line separation; every
    local minimum of the separation is refined by the vertex of a parabola
    fitted to ``sep**2`` (exact for a coupler frequency linear in current).
    Crossings alternate between the two sides of a flux period, so the
    period is the mean spacing of every second crossing.  The pair whose
    midpoint shows the qubit pushed down (coupler above it) brackets the
    sweet spot; that midpoint is minus the flux offset.
    """
    if currents_ma is None:
        m = model.mutual_current_per_phi0
        currents_ma = np.linspace(-1.2 * m, 1.2 * m, 2401)
    if probe_ghz is None:
        probe_ghz = np.arange(qubit_frequency - 0.4, qubit_frequency + 0.4 + 1e-9, 5e-4)
    I = np.asarray(currents_ma, dtype=float)
    f = np.asarray(probe_ghz, dtype=float)
    if I.ndim != 1 or I.size < 5 or np.any(np.diff(I) <= 0):
        raise ContractViolation("current grid must be increasing with at least 5 points")
    resp = spectroscopy_map(model, qubit_frequency, I, f, linewidth_mhz, noise_sigma, seed)
    # smooth over about one linewidth before peak finding
    width = mhz_to_ghz(linewidth_mhz) / (f[1] - f[0]) if f.size > 1 else 0.0
    s = 0.5 * width
    work = gaussian_filter1d(resp, s, axis=1) if s >= 1 else resp
    # white noise shrinks by sqrt(2 sqrt(pi) s) under a Gaussian of s samples
    shrink = np.sqrt(2.0 * np.sqrt(np.pi) * s) if s >= 1 else 1.0

    sep = np.full(I.size, np.inf)
    line = np.full(I.size, np.nan)
    for k in range(I.size):
        peaks = _column_peaks(f, work[k], rel_height, _noise_level(resp[k]) / shrink)
        if peaks:
            line[k] = peaks[0][0]
        if len(peaks) >= 2:
            sep[k] = abs(peaks[0][0] - peaks[1][0])
    cross = _crossings(I, sep, fit_window)
    diag = {"n_crossings": int(cross.size)}
    if cross.size < 2:
        raise CalibrationError("fewer than two avoided crossings detected", diagnostics=diag)
    if cross.size >= 3:
        period = float(np.mean(cross[2:] - cross[:-2]))
    else:
        raise CalibrationError("need three crossings to infer the flux period", diagnostics=diag)

    # classify each adjacent pair by the qubit-like line at its midpoint
    best = None
    for a, b in zip(cross[:-1], cross[1:]):
        mid = 0.5 * (a + b)
        q = np.interp(mid, I, line)
        if best is None or q < best[1]:
            best = (mid, q)
    sweet_current = best[0]
    offset = -sweet_current / period
    offset = float((offset + 0.5) % 1.0 - 0.5)
    return SpectroscopyResult(I, f, resp, cross, period, offset, line)


@dataclass
class DcCrosstalkResult:
    beta: float
    beta_signed: float
    beta_err: float
    source_fluxes: np.ndarray
    restoring_fluxes: np.ndarray
    bias_flux: float
    probe_ghz: float
    diagnostics: Dict = field(default_factory=dict)

    @property
    def below_floor(self) -> bool:
        return self.beta < DC_BETA_FLOOR


def _lower_line(model: CouplerModel, qubit_frequency: float, squid_phi):
    # squid_phi already includes the offset
    wc = squid_frequency(model.omega_c0, squid_phi)
    return hybridized_frequencies(qubit_frequency, wc, model.g)[0]


def bias_for_probe(model: CouplerModel, qubit_frequency: float, probe_detuning_mhz: float = DEFAULT_PROBE_DETUNING_MHZ) -> float:
    """Applied flux on the sweet-spot side where the lower line sits at the probe.

    The probe is ``probe_detuning_mhz`` below the bare qubit, i.e. on the
    flank where the coupler approaches from above.
    """
    fp = qubit_frequency - mhz_to_ghz(probe_detuning_mhz)
    # coupler crosses the qubit where cos(pi phi) = (f_q / w_c0)^2
    ratio = (qubit_frequency / model.omega_c0) ** 2
    if ratio >= 1:
        raise CalibrationError("coupler never reaches the qubit frequency")
    phi_x = np.arccos(ratio) / np.pi

    def resid(phi):
        return _lower_line(model, qubit_frequency, phi) - fp

    if resid(0.0) * resid(phi_x) > 0:
        raise CalibrationError(
            "probe frequency is not reachable on the sweet-spot flank",
            diagnostics={"probe_ghz": fp},
        )
    squid = brentq(resid, 0.0, phi_x, xtol=1e-14)
    return float(squid - model.flux_offset)


def restoring_flux(
    model: CouplerModel,
    qubit_frequency: float,
    probe_ghz: float,
    bias_flux: float,
    parasitic_flux: float,
    span: float = 0.1,
    tol: float = 1e-6,
) -> float:
    """Victim applied flux that puts the lower line back on the probe.

    Bisection within ``bias_flux +- span``; the residual is monotone there
    when the bias sits on one flank of a crossing.
    """

    def resid(phi):
        return float(_lower_line(model, qubit_frequency, phi + parasitic_flux + model.flux_offset)) - probe_ghz

    a, b = bias_flux - span, bias_flux + span
    fa, fb = resid(a), resid(b)
    if fa * fb > 0:
        raise MeasurementError(
            "restoring flux is not bracketed",
            diagnostics={"bracket": (a, b), "residuals_ghz": (fa, fb), "parasitic_flux": parasitic_flux},
        )
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = resid(m)
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def restoring_slope(
    model: CouplerModel,
    beta: float,
    qubit_frequency: float = 4.2,
    source_fluxes: Sequence[float] = (-1.0, 0.0, 1.0),
    probe_detuning_mhz: float = DEFAULT_PROBE_DETUNING_MHZ,
    tol: float = 1e-6,
    flux_noise: float = 0.0,
    seed: int = 0,
) -> DcCrosstalkResult:
    """Measure ``|d phi_restore / d phi_source|`` for an injected signed ``beta``.

    ``flux_noise`` adds seeded Gaussian flux jitter (flux quanta) to every
    restoring point, standing in for bias drift between measurements.
    """
    bias = bias_for_probe(model, qubit_frequency, probe_detuning_mhz)
    fp = float(_lower_line(model, qubit_frequency, bias + model.flux_offset))
    src = np.asarray(source_fluxes, dtype=float)
    if src.size < 2 or np.ptp(src) == 0:
        raise ContractViolation("need at least two distinct source fluxes")
    rng = np.random.default_rng(seed)
    rest = np.array([restoring_flux(model, qubit_frequency, fp, bias, beta * s, tol=tol) for s in src])
    if flux_noise > 0:
        rest = rest + rng.normal(0.0, flux_noise, size=rest.shape)
    fit = linear_fit(src, rest)
    # restoring flux cancels the parasitic one, so the slope is -beta
    signed = -fit.slope
    return DcCrosstalkResult(
        beta=abs(signed),
        beta_signed=signed,
        beta_err=fit.slope_err,
        source_fluxes=src,
        restoring_fluxes=rest,
        bias_flux=bias,
        probe_ghz=fp,
        diagnostics={"residual_rms": fit.residual_rms},
    )


def measure_dc_crosstalk(
    device: LatticeDevice,
    victim: int,
    source: int,
    coupler: Optional[CouplerModel] = None,
    beta: Optional[float] = None,
    **kw,
) -> DcCrosstalkResult:
    """dc-flux crosstalk of z-line ``source`` onto coupler ``victim`` of a lattice.

    The injected truth is ``beta`` if given, else the device's flux matrix.
    The probed qubit is the first qubit attached to the victim coupler.
    """
    n = len(device.couplers)
    for c in (victim, source):
        if not 0 <= c < n:
            raise ContractViolation(f"coupler index {c} out of range 0..{n - 1}")
    if beta is None:
        if device.flux_matrix is None:
            raise ContractViolation("device has no flux matrix and no beta was given")
        beta = float(device.flux_matrix.entries[victim, source])
    q = device.couplers[victim].qubits[0]
    kw.setdefault("qubit_frequency", device.sites[q].frequency)
    return restoring_slope(coupler or CouplerModel(), beta, **kw)
