"""The two window autoencoders and their training loop.

Embedding AE: time-embedding layer -> flatten (the N*K embedding) ->
reshape -> stack of same-padding 1-D conv blocks decoding back to N x F.
Baseline AE: strided conv encoder that halves the time axis per block,
mirrored by upsample+conv decoder blocks. Both train with minibatch Adam
on elementwise MSE; DTW is used only to score candidate configurations
(it is not differentiable, so it never enters the loss).

The baseline flags anomalies by a composite reconstruction score: the sum
of z-normalized MSE, MAE and DTW components, each standardized by
training-set statistics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import ndtensor as nd
from .dtw import dtw_distance
from .pipeline import Window, corpus_data
from .rng import make_rng
from .t2v import T2VLayer

VARIANTS = ("t2v", "reconstruction")


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the epoch/batch where it happened."""


@dataclass(frozen=True)
class AEConfig:
    variant: str = "t2v"
    k: int = 7                   # embedding width per timestep
    decoder_layers: int = 3
    encoder_layers: int = 2      # reconstruction variant only
    encoder_stride: int = 2      # time-axis halving per encoder block
    filters: int = 16
    kernel: int = 5
    epochs: int = 30
    batch: int = 32
    lr: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.k < 2:
            raise ValueError("K must be >= 2")
        if self.decoder_layers < 1 or self.encoder_layers < 1:
            raise ValueError("layer counts must be >= 1")
        if self.kernel % 2 == 0:
            raise ValueError("kernel size must be odd")
        if self.epochs < 1 or self.batch < 1:
            raise ValueError("epochs and batch size must be >= 1")
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")


@dataclass
class TrainedModel:
    config: AEConfig
    stack: nd.LayerStack
    n: int
    f: int
    loss_curve: list[float] = field(default_factory=list)
    val_dtw: float | None = None
    encoder_strides: list[int] = field(default_factory=list)


def build_t2v_ae(cfg: AEConfig, n: int, f: int) -> TrainedModel:
    """Untrained embedding AE: t2v -> flatten -> reshape -> conv decoder."""
    if cfg.variant != "t2v":
        raise ValueError(f"config variant is {cfg.variant!r}, expected 't2v'")
    rng = make_rng(cfg.seed)
    layers: list[nd.Layer] = [
        T2VLayer(n, f, cfg.k, rng=rng),
        nd.Flatten(),
        nd.Reshape(n, cfg.k),
    ]
    channels = [cfg.k] + [cfg.filters] * (cfg.decoder_layers - 1) + [f]
    for i in range(cfg.decoder_layers):
        layers.append(nd.Conv1d(channels[i], channels[i + 1], cfg.kernel, rng=rng))
        if i < cfg.decoder_layers - 1:
            layers.append(nd.ReLU())
    return TrainedModel(cfg, nd.LayerStack(layers), n, f)


def feasible_encoder_layers(n: int, stride: int, requested: int) -> int:
    """Largest layer count <= requested whose total stride divides n."""
    layers = requested
    while layers > 1 and n % (stride ** layers) != 0:
        layers -= 1
    return layers


def build_recon_ae(cfg: AEConfig, n: int, f: int) -> TrainedModel:
    """Untrained baseline AE: strided conv encoder, upsample+conv decoder."""
    if cfg.variant != "reconstruction":
        raise ValueError(f"config variant is {cfg.variant!r}, expected 'reconstruction'")
    strides = [cfg.encoder_stride] * cfg.encoder_layers
    total = int(np.prod(strides))
    if n % total != 0:
        raise ValueError(f"window length {n} not divisible by total stride {total}")
    rng = make_rng(cfg.seed)
    layers: list[nd.Layer] = []
    c = f
    for s in strides:
        layers.append(nd.Conv1d(c, cfg.filters, cfg.kernel, stride=s, rng=rng))
        layers.append(nd.ReLU())
        c = cfg.filters
    for i, s in enumerate(reversed(strides)):
        last = i == len(strides) - 1
        layers.append(nd.Upsample(s))
        layers.append(nd.Conv1d(c, f if last else cfg.filters, cfg.kernel, rng=rng))
        if not last:
            layers.append(nd.ReLU())
    return TrainedModel(cfg, nd.LayerStack(layers), n, f, encoder_strides=strides)


def build_model(cfg: AEConfig, n: int, f: int) -> TrainedModel:
    if cfg.variant == "t2v":
        return build_t2v_ae(cfg, n, f)
    return build_recon_ae(cfg, n, f)


def bottleneck_length(model: TrainedModel) -> int:
    length = model.n
    for s in model.encoder_strides:
        length //= s
    return length


def train(model: TrainedModel, windows: list[Window], cfg: AEConfig | None = None) -> TrainedModel:
    """Minibatch Adam on mean squared reconstruction error.

    Deterministic given cfg.seed: batch order, initialization and updates
    all derive from it. Appends one mean loss per epoch to the loss curve.
    """
    cfg = cfg or model.config
    data = corpus_data(windows)
    if data.shape[1:] != (model.n, model.f):
        raise ValueError(f"windows are {data.shape[1:]}, model expects {(model.n, model.f)}")
    n = len(data)
    rng = make_rng(cfg.seed + 1)  # offset: init used cfg.seed
    adam = nd.AdamState(lr=cfg.lr)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch):
            idx = order[start:start + cfg.batch]
            x = data[idx]
            y, tape = model.stack.forward_tape(x)
            loss, dy = nd.mse_loss_grad(y, x)
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch {start // cfg.batch}")
            _, layer_grads = model.stack.backward(tape, dy)
            params, grads = nd.stack_param_dicts(model.stack, layer_grads)
            nd.adam_step(adam, params, grads)
            epoch_loss += loss * len(idx)
        model.loss_curve.append(epoch_loss / n)
    return model


def embed(model: TrainedModel, window: Window | np.ndarray) -> np.ndarray:
    """N*K embedding of one window: output of the flatten stage."""
    if model.config.variant != "t2v":
        raise ValueError("embeddings come from the t2v variant only")
    x = window.data if isinstance(window, Window) else np.asarray(window, dtype=np.float64)
    return model.stack.forward_until(x[None], "flatten")[0]


def embed_many(model: TrainedModel, windows: list[Window]) -> np.ndarray:
    if model.config.variant != "t2v":
        raise ValueError("embeddings come from the t2v variant only")
    return model.stack.forward_until(corpus_data(windows), "flatten")


def reconstruct(model: TrainedModel, window: Window | np.ndarray) -> np.ndarray:
    x = window.data if isinstance(window, Window) else np.asarray(window, dtype=np.float64)
    if x.shape != (model.n, model.f):
        raise ValueError(f"window is {x.shape}, model expects {(model.n, model.f)}")
    return model.stack.forward(x[None])[0]


# ---------------------------------------------------------------------------
# composite reconstruction score (baseline anomaly detector)
# ---------------------------------------------------------------------------

@dataclass
class ScoreCalibration:
    """Training-set mean/std for each raw component (MSE, MAE, DTW) and the
    decision threshold (a quantile of calibrated training scores)."""

    means: np.ndarray
    stds: np.ndarray
    threshold: float
    threshold_quantile: float

    def __post_init__(self):
        self.means = np.asarray(self.means, dtype=np.float64)
        self.stds = np.asarray(self.stds, dtype=np.float64)


def score_components(model: TrainedModel, window: Window | np.ndarray) -> np.ndarray:
    x = window.data if isinstance(window, Window) else np.asarray(window, dtype=np.float64)
    xhat = reconstruct(model, x)
    diff = xhat - x
    return np.array([
        float(np.mean(diff * diff)),
        float(np.mean(np.abs(diff))),
        dtw_distance(x, xhat),
    ])


def calibrate(model: TrainedModel, train_windows: list[Window],
              threshold_quantile: float = 0.99) -> ScoreCalibration:
    comps = np.stack([score_components(model, w) for w in train_windows])
    means = comps.mean(axis=0)
    stds = np.maximum(comps.std(axis=0), 1e-12)
    z = (comps - means) / stds
    scores = z.sum(axis=1)
    return ScoreCalibration(means, stds,
                            float(np.quantile(scores, threshold_quantile)),
                            threshold_quantile)


def combine_components(comps: np.ndarray, calib: ScoreCalibration) -> float:
    """z-normalize each raw component by training stats and sum them."""
    if calib is None:
        raise ValueError("missing score calibration")
    return float(((np.asarray(comps, dtype=np.float64) - calib.means) / calib.stds).sum())


def recon_score(model: TrainedModel, window: Window | np.ndarray,
                calib: ScoreCalibration) -> float:
    """Sum of z-normalized MSE/MAE/DTW components; higher = more anomalous."""
    return combine_components(score_components(model, window), calib)


# ---------------------------------------------------------------------------
# hyperparameter search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchSpace:
    k: tuple[int, int] = (4, 16)
    layers: tuple[int, int] = (2, 4)
    kernels: tuple[int, ...] = (3, 5, 7)
    filters: tuple[int, ...] = (8, 16, 32)
    epochs: tuple[int, int] = (20, 100)
    batches: tuple[int, ...] = (16, 32, 64)


@dataclass
class SearchResult:
    trials: list[tuple[AEConfig, float]]
    best_index: int

    @property
    def best_config(self) -> AEConfig:
        return self.trials[self.best_index][0]

    @property
    def best_score(self) -> float:
        return self.trials[self.best_index][1]


def validation_dtw(model: TrainedModel, windows: list[Window]) -> float:
    """Mean DTW between each window and its reconstruction."""
    return float(np.mean([dtw_distance(w.data, reconstruct(model, w)) for w in windows]))


def _sample_config(variant: str, space: SearchSpace, rng, seed: int) -> AEConfig:
    return AEConfig(
        variant=variant,
        k=int(rng.integers(space.k[0], space.k[1] + 1)),
        decoder_layers=int(rng.integers(space.layers[0], space.layers[1] + 1)),
        encoder_layers=int(rng.integers(space.layers[0], space.layers[1] + 1)),
        filters=int(rng.choice(space.filters)),
        kernel=int(rng.choice(space.kernels)),
        epochs=int(rng.integers(space.epochs[0], space.epochs[1] + 1)),
        batch=int(rng.choice(space.batches)),
        seed=seed,
    )


def hyper_search(windows: list[Window], variant: str, n_trials: int,
                 master_seed: int, space: SearchSpace = SearchSpace()) -> SearchResult:
    """Seeded random search over the tunable set, scored by validation DTW.

    Training minimizes MSE; candidate ranking uses mean DTW on a chronological
    90/10 validation split of the given windows.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    n_val = max(1, len(windows) // 10)
    train_windows = windows[:-n_val]
    val_windows = windows[-n_val:]
    if not train_windows:
        raise ValueError("not enough windows for a 90/10 split")
    n, f = train_windows[0].data.shape

    trials = []
    for t in range(n_trials):
        rng = make_rng(master_seed + t)
        cfg = _sample_config(variant, space, rng, seed=master_seed + t)
        if variant == "reconstruction":
            # sampled layer counts must keep the time axis divisible
            cfg = replace(cfg, encoder_layers=feasible_encoder_layers(
                n, cfg.encoder_stride, cfg.encoder_layers))
        model = train(build_model(cfg, n, f), train_windows)
        score = validation_dtw(model, val_windows)
        model.val_dtw = score
        trials.append((cfg, score))
    best = int(np.argmin([s for _, s in trials]))
    return SearchResult(trials, best)
