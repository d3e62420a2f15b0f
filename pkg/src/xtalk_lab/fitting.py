"""Curve fitting used by the virtual measurements.

Decaying sinusoids (Rabi and Ramsey traces), ordinary least-squares lines
with uncertainties, zero-intercept slopes, and dB aggregate statistics.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import curve_fit

from .errors import ContractViolation, FitError


@dataclass(frozen=True)
class SinusoidFit:
    """``amplitude * exp(-t/decay_time) * cos(2 pi frequency t + phase) + offset``.

    ``frequency`` is cyclic GHz for times in ns; ``decay_time`` is ``inf``
    when no decay is resolved.
    """

    frequency: float
    decay_time: float
    amplitude: float
    offset: float
    phase: float
    residual_rms: float
    frequency_err: float = np.nan
    cycles: float = np.nan

    def model(self, t):
        t = np.asarray(t, dtype=float)
        rate = 0.0 if np.isinf(self.decay_time) else 1.0 / self.decay_time
        return self.amplitude * np.exp(-rate * t) * np.cos(2 * np.pi * self.frequency * t + self.phase) + self.offset

    def as_dict(self) -> dict:
        return {
            "frequency_ghz": self.frequency,
            "frequency_err_ghz": self.frequency_err,
            "decay_time_ns": self.decay_time,
            "amplitude": self.amplitude,
            "offset": self.offset,
            "phase_rad": self.phase,
            "residual_rms": self.residual_rms,
        }


def _damped(t, a, f, ph, c, rate):
    # trial steps with a large negative rate may overflow; the solver rejects them
    with np.errstate(over="ignore", invalid="ignore"):
        return a * np.exp(-rate * t) * np.cos(2 * np.pi * f * t + ph) + c


def _damped_jac(t, a, f, ph, c, rate):
    with np.errstate(over="ignore"):
        env = np.exp(-rate * t)
    w = 2 * np.pi * f * t + ph
    cw, sw = np.cos(w), np.sin(w)
    return np.column_stack([
        env * cw,
        -a * env * sw * 2 * np.pi * t,
        -a * env * sw,
        np.ones_like(t),
        -t * a * env * cw,
    ])


def spectral_peak(t, y, pad: int = 16) -> float:
    """Frequency (cycles per time unit) of the largest non-DC periodogram bin.

    Assumes uniform sampling; the trace is zero-padded ``pad`` times so the
    peak is located on a fine grid.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    dt = (t[-1] - t[0]) / (t.size - 1)
    n = pad * t.size
    spec = np.abs(np.fft.rfft((y - y.mean()) * np.hanning(t.size), n=n))
    freqs = np.fft.rfftfreq(n, dt)
    # skip the DC lobe of the window
    k0 = max(1, int(np.ceil(pad * 1.5)))
    if k0 >= spec.size:
        return float(freqs[-1])
    k = k0 + int(np.argmax(spec[k0:]))
    return float(freqs[k])


def _linear_seed(t, y, f):
    """Amplitude, phase and offset at fixed frequency by linear least squares."""
    w = 2 * np.pi * f * t
    A = np.column_stack([np.cos(w), np.sin(w), np.ones_like(t)])
    (p, q, c), *_ = np.linalg.lstsq(A, y, rcond=None)
    # p cos + q sin = amp cos(w + ph)
    return float(np.hypot(p, q)), float(np.arctan2(-q, p)), float(c)


def fit_decaying_sinusoid(t, y, decay: bool = True, max_nfev: int = 2000) -> SinusoidFit:
    """Least-squares fit of an exponentially decaying sinusoid.

    The frequency is seeded from the periodogram peak, amplitude and phase
    from a linear fit at that frequency.  With ``decay=False`` the envelope is
    held flat.  Raises :class:`FitError` when the trace is constant or the
    optimiser fails; the error carries the seed as best-so-far.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ContractViolation("times and values must be 1-d arrays of equal length")
    if t.size < 8:
        raise ContractViolation("need at least 8 samples to fit a sinusoid")
    if not np.all(np.diff(t) > 0):
        raise ContractViolation("times must be strictly increasing")
    t0 = t[0]
    tt = t - t0
    span = tt[-1]

    if np.ptp(y) < 1e-12:
        best = {"amplitude": 0.0, "offset": float(y.mean()), "frequency": np.nan}
        raise FitError("constant trace: frequency is unidentifiable", best=best, residual_rms=0.0)

    f0 = spectral_peak(tt, y)
    a0, ph0, c0 = _linear_seed(tt, y, f0)
    seed = [a0, f0, ph0, c0, 0.0]
    best = dict(zip(("amplitude", "frequency", "phase", "offset", "rate"), seed))
    seed_rms = float(np.sqrt(np.mean((y - _damped(tt, *seed)) ** 2)))

    if decay:
        model, jac, p0 = _damped, _damped_jac, seed
    else:
        model = lambda t, a, f, ph, c: _damped(t, a, f, ph, c, 0.0)  # noqa: E731
        jac = lambda t, *p: _damped_jac(t, *p, 0.0)[:, :4]  # noqa: E731
        p0 = seed[:4]
    try:
        popt, pcov = curve_fit(model, tt, y, p0=p0, jac=jac, method="lm", maxfev=max_nfev)
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"sinusoid fit did not converge: {exc}", best=best, residual_rms=seed_rms) from exc
    if decay and popt[4] < 0:
        # a growing envelope is unphysical; fall back to a flat one
        return fit_decaying_sinusoid(t, y, decay=False, max_nfev=max_nfev)

    a, f, ph, c = popt[:4]
    rate = popt[4] if decay else 0.0
    # fold signs into the phase so amplitude and frequency are non-negative
    if f < 0:
        f, ph = -f, -ph
    if a < 0:
        a, ph = -a, ph + np.pi
    resid = y - model(tt, *popt)
    rms = float(np.sqrt(np.mean(resid**2)))
    ferr = float(np.sqrt(pcov[1, 1])) if np.all(np.isfinite(pcov)) else np.nan
    # shift the phase back to absolute time
    ph = float(np.angle(np.exp(1j * (ph - 2 * np.pi * f * t0))))
    return SinusoidFit(
        frequency=float(f),
        decay_time=float(np.inf if rate <= 0 else 1.0 / rate),
        amplitude=float(a),
        offset=float(c),
        phase=ph,
        residual_rms=rms,
        frequency_err=ferr,
        cycles=float(f * span),
    )


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    slope_err: float
    intercept_err: float
    residual_rms: float
    n: int


def linear_fit(x, y) -> LinearFit:
    """Equal-weight ordinary least squares ``y = slope x + intercept``.

    Standard errors use the residual variance with ``n - 2`` degrees of
    freedom (zero for two points).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ContractViolation("x and y must be 1-d arrays of equal length")
    if x.size < 2 or np.ptp(x) == 0:
        raise FitError("linear fit needs at least two distinct x values")
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (slope * x + intercept)
    s2 = np.sum(resid**2) / (n - 2) if n > 2 else 0.0
    return LinearFit(
        slope=float(slope),
        intercept=float(intercept),
        slope_err=float(np.sqrt(s2 / sxx)),
        intercept_err=float(np.sqrt(s2 * (1.0 / n + xm**2 / sxx))),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        n=n,
    )


def zero_intercept_slope(x, y):
    """Slope of ``y = k x`` by least squares and its standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sxx = np.sum(x * x)
    if x.size < 1 or sxx == 0:
        raise FitError("zero-intercept fit needs a non-zero x value")
    k = np.sum(x * y) / sxx
    dof = x.size - 1
    s2 = np.sum((y - k * x) ** 2) / dof if dof > 0 else 0.0
    return float(k), float(np.sqrt(s2 / sxx))


@dataclass(frozen=True)
class AggregateStats:
    mean: float
    std: float
    count: int
    counts: np.ndarray
    edges: np.ndarray


def histogram_edges(values, bin_width: float) -> np.ndarray:
    """Edges on integer multiples of ``bin_width`` covering all values."""
    v = np.asarray(values, dtype=float)
    lo = np.floor(v.min() / bin_width) * bin_width
    hi = np.floor(v.max() / bin_width) * bin_width + bin_width
    k = int(round((hi - lo) / bin_width))
    return lo + bin_width * np.arange(k + 1)


def aggregate_stats(values, bin_width: Optional[float] = 2.0) -> AggregateStats:
    """Mean and population standard deviation (in the units given) plus a histogram."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ContractViolation("cannot summarise an empty sequence")
    if not np.all(np.isfinite(v)):
        raise ContractViolation("values must be finite")
    if bin_width is None or bin_width <= 0:
        raise ContractViolation("bin width must be positive")
    edges = histogram_edges(v, bin_width)
    counts, _ = np.histogram(v, bins=edges)
    return AggregateStats(float(v.mean()), float(v.std()), int(v.size), counts, edges)
