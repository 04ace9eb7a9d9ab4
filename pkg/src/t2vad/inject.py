"""Synthetic anomaly and noise injection.

Two anomaly kinds model typical machinery faults: a persistent step offset
and periodic spikes with amplitudes drawn from a 3-component Gaussian
mixture. Two noise kinds (single-point offset, salt-and-pepper extremes)
are deliberately labeled normal: a detector should ignore them. From one
clean test split, `build_testsets` derives the four evaluation sets
A-6F / AN-6F / A-4F / AN-4F (anomalies on all six or only the four
non-flat features, with or without noise).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pipeline import Window
from .rng import make_rng


@dataclass(frozen=True)
class GMMSpec:
    """Mixture over spike amplitudes, in units of the per-feature std."""

    means: tuple[float, ...] = (2.0, 4.0, 6.0)
    stds: tuple[float, ...] = (0.5, 0.5, 0.5)
    weights: tuple[float, ...] = (1 / 3, 1 / 3, 1 / 3)

    def __post_init__(self):
        if not (len(self.means) == len(self.stds) == len(self.weights)):
            raise ValueError("GMM component lists must have equal length")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("GMM weights must sum to 1")
        if all(s == 0 for s in self.stds) and all(w == 0 for w in self.weights):
            raise ValueError("degenerate GMM")


@dataclass(frozen=True)
class InjectionSpec:
    anomaly_fraction: float = 0.5
    feature_scope: str = "all6"            # all6 | four
    flat_features: tuple[int, ...] = (4, 5)
    step_onset_range: tuple[int, int] = (20, 60)
    step_alpha: float = 3.0                # magnitude = alpha * per-feature std
    spike_period_range: tuple[int, int] = (5, 15)
    gmm: GMMSpec = field(default_factory=GMMSpec)
    noise_fraction: float = 0.10
    salt_pepper_prob: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.anomaly_fraction <= 1 or not 0 <= self.noise_fraction <= 1:
            raise ValueError("fractions must lie in [0, 1]")
        if self.feature_scope not in ("all6", "four"):
            raise ValueError(f"unknown feature scope {self.feature_scope!r}")


@dataclass
class TestSuite:
    """The four labeled evaluation sets keyed A-6F / AN-6F / A-4F / AN-4F."""

    sets: dict[str, list[Window]]
    seed: int

    KEYS = ("A-6F", "AN-6F", "A-4F", "AN-4F")
    __test__ = False            # bare data, despite the pytest-like name

    def __post_init__(self):
        missing = [k for k in self.KEYS if k not in self.sets]
        if missing:
            raise ValueError(f"missing test sets: {missing}")


def _feature_std(data: np.ndarray) -> np.ndarray:
    return data.std(axis=0)


def inject_step(w: Window, features, onset: int, magnitude_per_feature) -> Window:
    """Add a persistent offset to every row >= onset of the selected features."""
    features = list(features)
    if not features:
        raise ValueError("empty feature set")
    n = w.data.shape[0]
    if not 0 <= onset < n:
        raise ValueError(f"onset must be in [0, {n}), got {onset}")
    magnitude = np.broadcast_to(np.asarray(magnitude_per_feature, dtype=np.float64),
                                (len(features),))
    data = w.data.copy()
    for f, m in zip(features, magnitude):
        data[onset:, f] += m
    return Window(data, label="anomalous", tags=w.tags | {"step"}, origin=w.origin)


def sample_spike_amplitudes(gmm: GMMSpec, n: int, rng: np.random.Generator):
    """Draw n (amplitude, sign) pairs from the mixture; amplitudes unsigned."""
    comp = rng.choice(len(gmm.weights), size=n, p=np.asarray(gmm.weights))
    amps = rng.normal(np.asarray(gmm.means)[comp], np.asarray(gmm.stds)[comp])
    signs = rng.choice([-1.0, 1.0], size=n)
    return amps, signs


def inject_spikes(w: Window, features, period: int, gmm: GMMSpec, seed: int) -> Window:
    """Additive spikes at rows {period, 2*period, ...} of the selected features.

    Per spike and feature: mixture component by weight, amplitude from that
    component (scaled by the feature's std), random sign.
    """
    features = list(features)
    if not features:
        raise ValueError("empty feature set")
    if period < 2:
        raise ValueError(f"period must be >= 2, got {period}")
    rng = make_rng(seed)
    n = w.data.shape[0]
    rows = np.arange(period, n, period)
    sigma = _feature_std(w.data)
    data = w.data.copy()
    for f in features:
        amps, signs = sample_spike_amplitudes(gmm, len(rows), rng)
        data[rows, f] += signs * amps * sigma[f]
    return Window(data, label="anomalous", tags=w.tags | {"spikes"}, origin=w.origin)


def inject_point_noise(w: Window, seed: int) -> Window:
    """Offset one uniformly chosen cell by 6 per-feature stds; label unchanged."""
    rng = make_rng(seed)
    n, f = w.data.shape
    row = int(rng.integers(n))
    col = int(rng.integers(f))
    sign = float(rng.choice([-1.0, 1.0]))
    data = w.data.copy()
    data[row, col] += sign * 6.0 * _feature_std(w.data)[col]
    return Window(data, label=w.label, tags=w.tags | {"point_noise"}, origin=w.origin)


def inject_saltpepper(w: Window, point_prob: float, seed: int,
                      feature_min=None, feature_max=None) -> Window:
    """Independently set each cell, with prob `point_prob`, to the feature's
    extreme value (min or max, 50/50). Extremes default to the window's own;
    pass corpus-level extremes for the benchmark protocol. Label unchanged.
    """
    if not 0 < point_prob < 1:
        raise ValueError("point_prob must be in (0, 1)")
    rng = make_rng(seed)
    data = w.data.copy()
    lo = w.data.min(axis=0) if feature_min is None else np.asarray(feature_min, dtype=np.float64)
    hi = w.data.max(axis=0) if feature_max is None else np.asarray(feature_max, dtype=np.float64)
    hit = rng.random(data.shape) < point_prob
    salt = rng.random(data.shape) < 0.5
    data = np.where(hit, np.where(salt, hi, lo), data)
    return Window(data, label=w.label, tags=w.tags | {"salt_pepper"}, origin=w.origin)


def _inject_anomalies(windows, spec: InjectionSpec, features, rng) -> list[Window]:
    n = len(windows)
    n_anom = int(round(spec.anomaly_fraction * n))
    chosen = set(int(i) for i in rng.permutation(n)[:n_anom])
    out = []
    for i, w in enumerate(windows):
        if i not in chosen:
            out.append(Window(w.data.copy(), label=w.label, tags=w.tags, origin=w.origin))
            continue
        use_step = rng.random() < 0.5
        if use_step:
            onset = int(rng.integers(spec.step_onset_range[0], spec.step_onset_range[1] + 1))
            magnitude = spec.step_alpha * _feature_std(w.data)[list(features)]
            out.append(inject_step(w, features, onset, magnitude))
        else:
            period = int(rng.integers(spec.spike_period_range[0],
                                      spec.spike_period_range[1] + 1))
            out.append(inject_spikes(w, features, period, spec.gmm,
                                     seed=int(rng.integers(2 ** 62))))
    return out


def _inject_noise(windows, spec: InjectionSpec, extremes, rng) -> list[Window]:
    n = len(windows)
    n_noise = int(np.floor(spec.noise_fraction * n))
    chosen = [int(i) for i in rng.permutation(n)[:n_noise]]
    out = [Window(w.data.copy(), label=w.label, tags=w.tags, origin=w.origin) for w in windows]
    lo, hi = extremes
    for i in chosen:
        if rng.random() < 0.5:
            out[i] = inject_point_noise(out[i], seed=int(rng.integers(2 ** 62)))
        else:
            out[i] = inject_saltpepper(out[i], spec.salt_pepper_prob,
                                       seed=int(rng.integers(2 ** 62)),
                                       feature_min=lo, feature_max=hi)
    return out


def build_testsets(clean_test: list[Window], spec: InjectionSpec = InjectionSpec()) -> TestSuite:
    """Construct the four evaluation sets from a clean, all-normal test split.

    A-6F injects step/spikes (50/50) into `anomaly_fraction` of windows over
    all features; A-4F does the same excluding the flat features. AN sets
    additionally apply point or salt-pepper noise (50/50) to floor(10%) of
    windows. Pure function of (clean_test, spec).
    """
    if len(clean_test) < 10:
        raise ValueError(f"need at least 10 test windows, got {len(clean_test)}")
    if any(w.label != "normal" for w in clean_test):
        raise ValueError("clean test windows must all be labeled normal")
    n_features = clean_test[0].data.shape[1]
    all_features = list(range(n_features))
    four = [f for f in all_features if f not in spec.flat_features]
    stacked = np.stack([w.data for w in clean_test])
    extremes = (stacked.min(axis=(0, 1)), stacked.max(axis=(0, 1)))

    sets = {}
    for key, features in (("A-6F", all_features), ("A-4F", four)):
        rng = make_rng(spec.seed)                  # same anomaly draw for 6F/4F pairing
        anomalous = _inject_anomalies(clean_test, spec, features, rng)
        sets[key] = anomalous
        noise_rng = make_rng(spec.seed + 1)
        sets["AN-" + key[2:]] = _inject_noise(anomalous, spec, extremes, noise_rng)
    return TestSuite(sets, seed=spec.seed)
