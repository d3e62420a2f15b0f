"""CSV persistence and crosstalk dataset ingestion.

All files are comma separated with a header row and '.' decimals; units live
in column names.  Lines starting with ``#`` are comments; ``# key: value``
comments at the top of a dataset are kept as metadata.  Floats are written
with 17 significant digits so files round-trip exactly.
"""
from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .crosstalk import FLUX_SIGNED, XY_DB, CrosstalkMatrix
from .errors import DatasetError
from .fitting import AggregateStats, aggregate_stats

DB = "dB"
FRACTION = "fraction"
UNITS = {DB: XY_DB, FRACTION: FLUX_SIGNED}
DEFAULT_BIN = {DB: 2.0, FRACTION: 5e-4}


def fmt(x) -> str:
    """Locale-independent float text that parses back to the same value."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        # adding 0.0 turns -0.0 into 0.0
        return format(float(x) + 0.0, ".17g")
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence], comments: Optional[Dict[str, object]] = None):
    """Write rows under ``header``; ``comments`` become leading ``# key: value`` lines."""
    buf = _io.StringIO()
    for k, v in (comments or {}).items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(x) for x in r])
    Path(path).write_text(buf.getvalue())


def read_csv(path):
    """Return ``(metadata, rows)`` where rows are dicts keyed by column name."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    meta: Dict[str, str] = {}
    body: List[str] = []
    for line in text.splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            key, sep, val = s[1:].partition(":")
            if sep and not body:
                meta[key.strip()] = val.strip()
            continue
        body.append(line)
    if not body:
        return meta, []
    return meta, list(csv.DictReader(body))


def write_trace(path, times, population):
    write_csv(path, ["t_ns", "population"], zip(times, population))


def write_fit(path, params: Dict[str, float]):
    write_csv(path, ["parameter", "value"], params.items())


@dataclass(frozen=True)
class CrosstalkRecord:
    victim: object
    source: object
    value: float
    unit: str
    protocol: str
    seed: int


def write_crosstalk_results(path, records: Sequence[CrosstalkRecord]):
    write_csv(
        path,
        ["victim", "source", "value", "unit", "protocol", "seed"],
        ((r.victim, r.source, r.value, r.unit, r.protocol, r.seed) for r in records),
    )


def write_crosstalk_matrix(path, matrix: CrosstalkMatrix):
    """Off-diagonal entries as ``(victim, source, value, unit)`` or ``(victim, source, beta_signed)``."""
    labels = matrix.labels or tuple(range(matrix.size))
    rows = [
        (labels[i], labels[j], matrix.entries[i, j])
        for i in range(matrix.size)
        for j in range(matrix.size)
        if i != j and np.isfinite(matrix.entries[i, j])
    ]
    if matrix.kind == FLUX_SIGNED:
        write_csv(path, ["victim", "source", "beta_signed"], rows)
    else:
        write_csv(path, ["victim", "source", "value", "unit"], ((v, s, x, DB) for v, s, x in rows))


@dataclass
class CrosstalkDataset:
    matrix: CrosstalkMatrix
    stats: AggregateStats
    values: np.ndarray
    unit: str
    pairs: List[tuple]
    distances_mm: Optional[np.ndarray] = None
    metadata: Dict[str, str] = field(default_factory=dict)


def _labels(ids: List[str]):
    """Integer ids ``0..n-1`` map to an unlabelled matrix, anything else keeps its text."""
    try:
        ints = sorted({int(x) for x in ids})
    except ValueError:
        ints = None
    if ints is not None and ints == list(range(len(ints))) and all(str(int(x)) == x for x in ids):
        return None, {str(k): k for k in ints}
    order: List[str] = []
    for x in ids:
        if x not in order:
            order.append(x)
    return tuple(order), {x: k for k, x in enumerate(order)}


def ingest_crosstalk_dataset(path, bin_width: Optional[float] = None) -> CrosstalkDataset:
    """Read a pairwise crosstalk file into a typed matrix plus statistics.

    Accepted layouts are ``victim, source, value, unit[, distance_mm]`` with
    unit ``dB`` or ``fraction``, and ``victim, source, beta_signed`` for
    signed flux matrices.  Unmeasured pairs are NaN in the matrix.
    """
    meta, rows = read_csv(path)
    if not rows:
        raise DatasetError(f"{path} contains no crosstalk pairs")
    cols = set(rows[0])
    if {"victim", "source", "beta_signed"} <= cols:
        units = [FRACTION] * len(rows)
        raw = [r["beta_signed"] for r in rows]
    elif {"victim", "source", "value", "unit"} <= cols:
        units = [r["unit"].strip() for r in rows]
        raw = [r["value"] for r in rows]
    else:
        raise DatasetError(f"{path}: expected columns victim, source, value, unit (or beta_signed)")
    kinds = set(units)
    if len(kinds) > 1:
        raise DatasetError(f"{path} mixes units {sorted(kinds)}")
    unit = units[0]
    if unit not in UNITS:
        raise DatasetError(f"{path}: unknown unit {unit!r}; use 'dB' or 'fraction'")
    try:
        values = np.array([float(x) for x in raw])
    except ValueError as exc:
        raise DatasetError(f"{path}: non-numeric value: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise DatasetError(f"{path}: values must be finite")

    pairs = [(r["victim"].strip(), r["source"].strip()) for r in rows]
    if len(set(pairs)) != len(pairs):
        dup = next(p for p in pairs if pairs.count(p) > 1)
        raise DatasetError(f"{path}: duplicate pair {dup}")
    if any(v == s for v, s in pairs):
        raise DatasetError(f"{path}: diagonal entries are fixed and must not be listed")

    labels, index = _labels([x for p in pairs for x in p])
    n = len(index)
    kind = UNITS[unit]
    e = np.full((n, n), np.nan)
    np.fill_diagonal(e, 0.0 if kind == XY_DB else 1.0)
    for (v, s), x in zip(pairs, values):
        e[index[v], index[s]] = x
    matrix = CrosstalkMatrix(kind, e, labels=labels)

    dist = None
    if "distance_mm" in cols:
        try:
            dist = np.array([float(r["distance_mm"]) for r in rows])
        except ValueError as exc:
            raise DatasetError(f"{path}: non-numeric distance: {exc}") from exc
    stats = aggregate_stats(values, bin_width or DEFAULT_BIN[unit])
    return CrosstalkDataset(matrix, stats, values, unit, pairs, dist, meta)


def read_crosstalk_matrix(path) -> CrosstalkMatrix:
    return ingest_crosstalk_dataset(path).matrix


def per_distance_means(distances, values, decimals: int = 6):
    """Unique distances (ascending) with the mean and count of values at each."""
    d = np.round(np.asarray(distances, dtype=float), decimals)
    v = np.asarray(values, dtype=float)
    uniq = np.unique(d)
    means = np.array([v[d == u].mean() for u in uniq])
    counts = np.array([(d == u).sum() for u in uniq])
    return uniq, means, counts
