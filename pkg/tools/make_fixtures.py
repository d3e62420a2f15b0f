"""Regenerate the bundled datasets in ``src/xtalk_lab/data``.

The crosstalk files are synthetic: each value is a linear distance law plus
a residual orthogonal to (1, d), scaled so the file has exactly the target
mean and standard deviation.  The capacitance set places 25 qubits on a
2 mm grid and picks each coupling so the direct crosstalk follows a
monotone distance law spanning the target range.

    python3 tools/make_fixtures.py
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from xtalk_lab.io import DB, write_csv
from xtalk_lab.lattice import build_lattice

DATA = Path(__file__).resolve().parents[1] / "src" / "xtalk_lab" / "data"
SEED = 7


def lattice_pairs(n=5, pitch=2.0):
    dev = build_lattice(n, pitch)
    d = dev.distance_matrix()
    pairs = [(i, j, d[i, j]) for i in range(dev.num_qubits) for j in range(dev.num_qubits) if i != j]
    return dev, pairs


def pick_pairs(pairs, count, target_mean, rng, iters=20000):
    """Random subset of ``count`` pairs whose mean distance is near ``target_mean``."""
    idx = rng.choice(len(pairs), count, replace=False)
    dist = np.array([p[2] for p in pairs])
    rest = np.setdiff1d(np.arange(len(pairs)), idx)
    for _ in range(iters):
        err = dist[idx].mean() - target_mean
        if abs(err) < 1e-3:
            break
        a, b = rng.integers(count), rng.integers(rest.size)
        new = dist[idx].sum() - dist[idx[a]] + dist[rest[b]]
        if abs(new / count - target_mean) < abs(err):
            idx[a], rest[b] = rest[b], idx[a]
    return sorted((pairs[k] for k in idx), key=lambda p: (p[0], p[1]))


def law_values(d, slope, intercept, mean, std, rng):
    """``slope d + intercept + c + r`` with r orthogonal to (1, d) and exact mean/std."""
    d = np.asarray(d, dtype=float)
    X = np.column_stack([np.ones_like(d), d])
    r = rng.normal(size=d.size)
    r -= X @ np.linalg.lstsq(X, r, rcond=None)[0]
    base = slope * d
    var_r = std**2 - base.var()
    if var_r <= 0:
        raise ValueError("target std too small for this slope and distance spread")
    r *= np.sqrt(var_r) / r.std()
    v = base + r
    return v - v.mean() + mean


def write_xy(name, count, mean, std, slope, intercept, rng, note):
    dev, pairs = lattice_pairs()
    # the fitted intercept equals `intercept` when the mean distance matches
    d_target = (mean - intercept) / slope
    chosen = pick_pairs(pairs, count, d_target, rng)
    d = np.array([p[2] for p in chosen])
    v = law_values(d, slope, intercept, mean, std, rng)
    write_csv(
        DATA / name,
        ["victim", "source", "value", "unit", "distance_mm"],
        [(i, j, x, DB, dd) for (i, j, dd), x in zip(chosen, v)],
        comments={"description": note, "pairs": count, "mean_dB": f"{v.mean():.2f}", "std_dB": f"{v.std():.2f}"},
    )


def write_capacitance(rng, lo=-150.0, hi=-49.0, mean=-95.5):
    dev, pairs = lattice_pairs()
    n = dev.num_qubits
    c_self = 85.0 + 10.0 * rng.random(n)
    f = dev.frequencies()
    c_own = 0.2
    d = np.array([p[2] for p in pairs])
    x = (d - d.min()) / (d.max() - d.min())

    def lam(p):
        return hi - (hi - lo) * x**p

    p = brentq(lambda p: lam(p).mean() - mean, 0.05, 5.0)
    target = lam(p)
    rows = [(i, i, c_own) for i in range(n)]
    for (i, j, _), t in zip(pairs, target):
        # invert 20 log10(w_i C_ij / (w_j C_jj) sqrt(C_j / C_i)) = t
        cij = 10 ** (t / 20) * f[j] * c_own / f[i] * np.sqrt(c_self[i] / c_self[j])
        rows.append((i, j, cij))
    rows.sort(key=lambda r: (r[0], r[1]))
    write_csv(DATA / "capacitance_couplings.csv", ["i", "j", "c_ff"], rows,
              comments={"description": "qubit-to-line coupling capacitances, 5x5 grid, 2 mm pitch",
                        "lambda_direct_mean_dB": f"{target.mean():.2f}",
                        "lambda_direct_range_dB": f"[{target.min():.1f}, {target.max():.1f}]"})
    write_csv(DATA / "capacitance_self.csv", ["i", "c_self_ff", "frequency_ghz"],
              [(i, c_self[i], f[i]) for i in range(n)])


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    write_xy("xy_bare_72.csv", 72, -39.4, 3.7, -1.1, -33.9, rng, "bare device, 72 measured pairs")
    write_xy("xy_tunnel_72.csv", 72, -37.4, 3.9, -1.0, -32.4, rng, "device with tunnels, 72 measured pairs")
    write_xy("xy_bare_full_210.csv", 210, -39.8, 4.0, -1.1, -33.9, rng, "bare device, all 210 pairs")
    write_capacitance(rng)


if __name__ == "__main__":
    main()
