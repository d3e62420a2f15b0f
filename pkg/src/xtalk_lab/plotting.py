"""SVG figures for crosstalk data and error budgets."""
from __future__ import annotations

from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import ContractViolation  # noqa: E402
from .fitting import histogram_edges  # noqa: E402
from .io import per_distance_means  # noqa: E402

SCATTER = "scatter_mean_vs_distance"
HISTOGRAM = "histogram"
ERROR_VS_N = "error_vs_n"
SPECTROSCOPY = "spectroscopy_map"
KINDS = (SCATTER, HISTOGRAM, ERROR_VS_N, SPECTROSCOPY)

# fixed id salt keeps repeated renders identical
plt.rcParams["svg.hashsalt"] = "xtalk-lab"


def _need(data: dict, keys, kind):
    missing = [k for k in keys if k not in data]
    if missing:
        raise ContractViolation(f"{kind} plot needs {missing}")


def _scatter(ax, data):
    _need(data, ("distance_mm", "values_db"), SCATTER)
    d = np.asarray(data["distance_mm"], dtype=float)
    v = np.asarray(data["values_db"], dtype=float)
    if d.size == 0 or d.shape != v.shape:
        raise ContractViolation("scatter needs equally long, non-empty distance and value arrays")
    ax.plot(d, v, ".", alpha=0.5, label="pairs")
    u, m, _ = per_distance_means(d, v)
    ax.plot(u, m, "o--", ms=8, label="mean per distance")
    if data.get("fit") is not None:
        slope, icpt = data["fit"]
        x = np.linspace(0.0, d.max() * 1.05, 50)
        ax.plot(x, slope * x + icpt, "-", label=f"fit {slope:.2f} dB/mm, {icpt:.1f} dB")
    ax.set_xlabel("distance d (mm)")
    ax.set_ylabel("crosstalk (dB)")
    ax.legend()


def _histogram(ax, data):
    _need(data, ("values",), HISTOGRAM)
    v = np.asarray(data["values"], dtype=float)
    if v.size == 0:
        raise ContractViolation("histogram of an empty dataset")
    edges = histogram_edges(v, float(data.get("bin_width", 2.0)))
    ax.hist(v, bins=edges, edgecolor="k")
    ax.set_xlabel(f"crosstalk ({data.get('unit', 'dB')})")
    ax.set_ylabel("count")


def _error_vs_n(ax, data):
    _need(data, ("series",), ERROR_VS_N)
    series = data["series"]
    if not series:
        raise ContractViolation("error-vs-N plot needs at least one series")
    for label, (nq, err) in series.items():
        nq = np.asarray(nq, dtype=float)
        err = np.asarray(err, dtype=float)
        if nq.size == 0 or nq.shape != err.shape:
            raise ContractViolation(f"series {label!r} is empty or ragged")
        ax.plot(nq, err, "o-", label=label)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("number of qubits")
    ax.set_ylabel("total single-qubit gate error")
    ax.legend()


def _spectroscopy(ax, data):
    _need(data, ("currents_ma", "probe_ghz", "response"), SPECTROSCOPY)
    I = np.asarray(data["currents_ma"], dtype=float)
    f = np.asarray(data["probe_ghz"], dtype=float)
    r = np.asarray(data["response"], dtype=float)
    if r.shape != (I.size, f.size) or r.size == 0:
        raise ContractViolation("response must have shape (currents, probe frequencies)")
    # raster image: a vector mesh of a dense map makes a huge SVG
    ax.imshow(r.T, origin="lower", aspect="auto", interpolation="nearest",
              extent=(I.min(), I.max(), f.min(), f.max()))
    for c in data.get("crossings_ma", ()):
        ax.axvline(c, color="w", lw=0.5, ls=":")
    ax.set_xlabel("coupler current I (mA)")
    ax.set_ylabel("probe frequency (GHz)")


_DRAW = {SCATTER: _scatter, HISTOGRAM: _histogram, ERROR_VS_N: _error_vs_n, SPECTROSCOPY: _spectroscopy}


def emit_plot(data: dict, kind: str, path, config_hash: Optional[str] = None, title: Optional[str] = None) -> Path:
    """Render ``data`` as an SVG of the given kind.

    The figure is drawn completely before anything is written, so a schema
    error leaves no file behind.
    """
    if kind not in _DRAW:
        raise ContractViolation(f"unknown plot kind {kind!r}; choose from {KINDS}")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    try:
        _DRAW[kind](ax, data)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        meta = {"Date": None, "Creator": "xtalk-lab"}
        if config_hash:
            meta["Description"] = f"config_sha256={config_hash}"
        path = Path(path)
        fig.savefig(path, format="svg", metadata=meta)
    finally:
        plt.close(fig)
    return path
