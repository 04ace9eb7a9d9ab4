"""Data ingestion and preprocessing: cleaning, resampling, windowing,
splitting, plus a synthetic corpus generator.

The chain turns raw per-second sensor CSVs into fixed-size windows of
N=100 steps x F=6 features: forward-fill missing cells, drop duplicate
rows, fence outliers on per-column quantiles, mean-resample long files,
cut consecutive non-overlapping 100-step windows and pad short remainders
by repeating the last row. The synthetic generator stands in for plant
data: four correlated trend+sinusoid features and two near-flat ones.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .rng import make_rng

WINDOW_STEPS = 100
N_FEATURES = 6
ANOMALY_TAGS = frozenset({"step", "spikes"})
MIN_REMAINDER = 10


@dataclass
class RawSeries:
    """One source file: sorted integer-second timestamps and an (n, F)
    value matrix with NaN marking missing cells. Repeated timestamps are
    legal here (plants re-log seconds); `clean` drops exact duplicates and
    `resample` merges whatever remains."""

    timestamps: np.ndarray
    values: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or len(self.timestamps) != len(self.values):
            raise ValueError("values must be (n, F) aligned with timestamps")
        if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps) >= 0):
            raise ValueError(f"timestamps not sorted in {self.source_id!r}")

    def __len__(self):
        return len(self.timestamps)


@dataclass
class Window:
    """Fixed-size labeled window. Anomalous iff a step or spikes tag is set;
    noise tags never flip the label."""

    data: np.ndarray
    label: str = "normal"
    tags: frozenset = frozenset()
    origin: str = ""

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.shape != (WINDOW_STEPS, self.data.shape[1]):
            raise ValueError(f"window must have {WINDOW_STEPS} rows, got {self.data.shape}")
        self.tags = frozenset(self.tags)
        expected = "anomalous" if self.tags & ANOMALY_TAGS else "normal"
        if self.label != expected:
            raise ValueError(f"label {self.label!r} inconsistent with tags {set(self.tags)}")


@dataclass
class Corpus:
    windows: list[Window]
    train_idx: list[int]
    test_idx: list[int]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.windows)
        if sorted(self.train_idx + self.test_idx) != list(range(n)):
            raise ValueError("split must be disjoint and exhaustive")

    @property
    def train_windows(self) -> list[Window]:
        return [self.windows[i] for i in self.train_idx]

    @property
    def test_windows(self) -> list[Window]:
        return [self.windows[i] for i in self.test_idx]


def load_csv(path, feature_columns, timestamp_column: str = "timestamp") -> RawSeries:
    """Parse one CSV with a header row; blank or NaN cells are marked missing."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        missing = [c for c in [timestamp_column, *feature_columns] if c not in header]
        if missing:
            raise ValueError(f"{path}: unknown columns {missing}")
        t_col = header.index(timestamp_column)
        f_cols = [header.index(c) for c in feature_columns]

        timestamps, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                timestamps.append(int(float(row[t_col])))
                values = []
                for c in f_cols:
                    cell = row[c].strip()
                    if cell == "" or cell.lower() == "nan":
                        values.append(np.nan)
                    else:
                        values.append(float(cell))
                rows.append(values)
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}: unparsable row at line {lineno}: {exc}") from None
    return RawSeries(np.array(timestamps, dtype=np.int64),
                     np.array(rows, dtype=np.float64).reshape(len(rows), len(feature_columns)),
                     source_id=str(path))


def clean(s: RawSeries, quantile_fence_k: float = 1.5) -> RawSeries:
    """Forward-fill missing cells, drop duplicate rows, fence outliers.

    Rows are dropped when any feature lies outside
    [Q1 - k*IQR, Q3 + k*IQR] (per-column quantiles, linear interpolation).
    k=0 reproduces the literal keep-only-the-IQR rule; note that mode is
    contractive, not idempotent: quantiles are recomputed from whatever
    survives, so applying it twice can discard more rows.
    """
    if quantile_fence_k < 0:
        raise ValueError("quantile fence multiplier must be >= 0")
    values = s.values.copy()
    ts = s.timestamps.copy()

    # forward fill per column; rows still missing afterwards are leading rows
    for col in range(values.shape[1]):
        v = values[:, col]
        mask = np.isnan(v)
        if mask.all():
            raise ValueError(f"{s.source_id!r}: column {col} entirely missing")
        idx = np.where(~mask, np.arange(len(v)), 0)
        np.maximum.accumulate(idx, out=idx)
        filled = v[idx]
        filled[np.cumsum(~mask) == 0] = np.nan  # nothing before the first value
        values[:, col] = filled
    keep = ~np.isnan(values).any(axis=1)
    values, ts = values[keep], ts[keep]

    # exact duplicates: identical timestamp and feature row as predecessor
    if len(values) > 1:
        same_t = np.diff(ts) == 0
        same_v = (values[1:] == values[:-1]).all(axis=1)
        keep = np.concatenate([[True], ~(same_t & same_v)])
        values, ts = values[keep], ts[keep]

    if len(values):
        q1 = np.quantile(values, 0.25, axis=0)
        q3 = np.quantile(values, 0.75, axis=0)
        iqr = q3 - q1
        lo = q1 - quantile_fence_k * iqr
        hi = q3 + quantile_fence_k * iqr
        keep = ((values >= lo) & (values <= hi)).all(axis=1)
        values, ts = values[keep], ts[keep]

    if len(values) == 0:
        raise ValueError(f"{s.source_id!r}: series empty after cleaning")
    return RawSeries(ts, values, s.source_id)


def resample(s: RawSeries, window_seconds: int) -> RawSeries:
    """Per-bucket feature means; each bucket keeps its last row's timestamp."""
    if window_seconds < 1:
        raise ValueError("window_seconds must be >= 1")
    if window_seconds == 1 or len(s) == 0:
        return replace(s)
    buckets = s.timestamps // window_seconds
    _, starts = np.unique(buckets, return_index=True)
    ends = np.append(starts[1:], len(s))
    values = np.stack([s.values[a:b].mean(axis=0) for a, b in zip(starts, ends)])
    ts = s.timestamps[ends - 1]
    return RawSeries(ts, values, s.source_id)


def auto_resample_width(n_rows: int, target: int = WINDOW_STEPS) -> int:
    """Bucket width that lands a long file near `target` steps."""
    return max(1, math.ceil(n_rows / target))


def windowize(s: RawSeries) -> list[Window]:
    """Cut consecutive non-overlapping 100-step windows.

    The final short remainder (and any series shorter than 100 steps) is
    extended by repeating its last row and tagged `padded`; remainders
    shorter than 10 steps are discarded.
    """
    if len(s) == 0:
        raise ValueError("cannot windowize an empty series")
    values = s.values
    windows = []
    n_full = len(values) // WINDOW_STEPS
    for i in range(n_full):
        chunk = values[i * WINDOW_STEPS:(i + 1) * WINDOW_STEPS]
        windows.append(Window(chunk.copy(), origin=f"{s.source_id}#{i}"))
    rem = values[n_full * WINDOW_STEPS:]
    if len(rem) >= MIN_REMAINDER:
        pad = np.repeat(rem[-1][None, :], WINDOW_STEPS - len(rem), axis=0)
        windows.append(Window(np.concatenate([rem, pad]), tags={"padded"},
                              origin=f"{s.source_id}#{n_full}"))
    return windows


def split(windows: list[Window], test_fraction: float = 0.10, seed: int = 0,
          provenance: dict | None = None) -> Corpus:
    """Seeded uniform train/test split; test size is round(n * fraction)."""
    n = len(windows)
    if n < 10:
        raise ValueError(f"need at least 10 windows to split, got {n}")
    n_test = int(round(n * test_fraction))
    rng = make_rng(seed)
    perm = rng.permutation(n)
    test_idx = sorted(int(i) for i in perm[:n_test])
    train_idx = sorted(int(i) for i in perm[n_test:])
    prov = dict(provenance or {})
    prov.update({"split_seed": seed, "test_fraction": test_fraction})
    return Corpus(windows, train_idx, test_idx, prov)


@dataclass(frozen=True)
class SynthParams:
    """Shape of the generated corpus: four correlated active features built
    from two shared latents, two near-flat features (std < 1% of the active
    ones)."""

    n_windows: int = 2950
    n_features: int = N_FEATURES
    flat_features: tuple[int, ...] = (4, 5)
    noise_std: float = 0.05
    flat_noise_std: float = 0.002
    test_fraction: float = 0.10

    def __post_init__(self):
        if self.n_windows < 10:
            raise ValueError("n_windows must be >= 10")
        if any(f >= self.n_features for f in self.flat_features):
            raise ValueError("flat feature index out of range")


def synth_generate(params: SynthParams = SynthParams(), seed: int = 0) -> Corpus:
    """Deterministic synthetic corpus standing in for proprietary plant data."""
    rng = make_rng(seed)
    n_active = params.n_features - len(params.flat_features)
    active = [f for f in range(params.n_features) if f not in params.flat_features]

    # corpus-level mixing of two latents -> cross-feature correlation
    mix = rng.uniform(0.4, 1.2, size=(n_active, 2)) * rng.choice([-1.0, 1.0], size=(n_active, 2))
    offsets = rng.uniform(-1.0, 1.0, size=n_active)
    flat_levels = rng.uniform(-1.0, 1.0, size=len(params.flat_features))

    t = np.arange(WINDOW_STEPS) / WINDOW_STEPS
    windows = []
    for i in range(params.n_windows):
        freq = rng.uniform(1.0, 3.0, size=2)
        phase = rng.uniform(0.0, 2 * np.pi, size=2)
        amp = rng.uniform(0.6, 1.4, size=2)
        trend = rng.uniform(-0.6, 0.6, size=2)
        level = rng.normal(0.0, 0.3, size=2)
        latents = np.stack([
            amp[j] * np.sin(2 * np.pi * freq[j] * t + phase[j]) + trend[j] * t + level[j]
            for j in range(2)
        ], axis=1)                                   # (N, 2)

        data = np.zeros((WINDOW_STEPS, params.n_features))
        data[:, active] = latents @ mix.T + offsets
        data[:, active] += rng.normal(0.0, params.noise_std, size=(WINDOW_STEPS, n_active))
        for j, f in enumerate(params.flat_features):
            data[:, f] = flat_levels[j] + rng.normal(0.0, params.flat_noise_std, WINDOW_STEPS)
        windows.append(Window(data, origin=f"synth#{i}"))

    provenance = {
        "generator": "synth",
        "seed": seed,
        "n_windows": params.n_windows,
        "n_features": params.n_features,
        "flat_features": list(params.flat_features),
        "noise_std": params.noise_std,
        "flat_noise_std": params.flat_noise_std,
    }
    return split(windows, params.test_fraction, seed=seed, provenance=provenance)


def corpus_data(windows: list[Window]) -> np.ndarray:
    """Stack windows into one (n, N, F) array."""
    return np.stack([w.data for w in windows])
