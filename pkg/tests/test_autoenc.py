import numpy as np
import pytest

from t2vad import ndtensor as nd
from t2vad.autoenc import (AEConfig, ScoreCalibration, SearchSpace, build_recon_ae,
                           build_t2v_ae, bottleneck_length, calibrate,
                           combine_components, embed, embed_many,
                           feasible_encoder_layers, hyper_search, recon_score,
                           reconstruct, score_components, train, validation_dtw)
from t2vad.dtw import dtw_distance
from t2vad.pipeline import Window
from t2vad.rng import make_rng

TINY_SPACE = SearchSpace(k=(2, 4), layers=(1, 2), kernels=(3,), filters=(4,),
                         epochs=(2, 3), batches=(8,))


def constant_window(value=0.7, f=6):
    return Window(np.full((100, f), value))


def zero_all_params(stack):
    for layer in stack.layers:
        for arr in layer.params().values():
            arr[...] = 0.0


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def test_t2v_ae_reference_shapes():
    cfg = AEConfig(variant="t2v", k=7, decoder_layers=3, seed=0)
    model = build_t2v_ae(cfg, 100, 6)
    x = make_rng(0).normal(size=(100, 6))
    assert reconstruct(model, x).shape == (100, 6)
    assert embed(model, x).shape == (700,)


def test_t2v_ae_minimal_config():
    model = build_t2v_ae(AEConfig(variant="t2v", k=2, decoder_layers=1, seed=1), 4, 1)
    out = reconstruct(model, np.zeros((4, 1)))
    assert out.shape == (4, 1)


def test_t2v_ae_zero_init_zero_output():
    model = build_t2v_ae(AEConfig(variant="t2v", seed=2), 10, 3)
    zero_all_params(model.stack)
    out = reconstruct(model, np.zeros((10, 3)))
    assert np.array_equal(out, np.zeros((10, 3)))


def test_t2v_ae_wrong_variant():
    with pytest.raises(ValueError, match="expected 't2v'"):
        build_t2v_ae(AEConfig(variant="reconstruction"), 100, 6)


def test_recon_ae_bottleneck_25():
    cfg = AEConfig(variant="reconstruction", encoder_layers=2, seed=3)
    model = build_recon_ae(cfg, 100, 6)
    assert bottleneck_length(model) == 25
    x = make_rng(1).normal(size=(100, 6))
    assert reconstruct(model, x).shape == (100, 6)


def test_recon_ae_identity_kernel():
    cfg = AEConfig(variant="reconstruction", encoder_layers=1, encoder_stride=1,
                   filters=1, kernel=1, seed=4)
    model = build_recon_ae(cfg, 100, 1)
    for layer in model.stack.layers:
        if layer.kind == "conv1d":
            layer.kernels[...] = 1.0
            layer.bias[...] = 0.0
    x = np.abs(make_rng(2).normal(size=(100, 1)))   # positive: ReLU transparent
    np.testing.assert_allclose(reconstruct(model, x), x, atol=1e-12)


def test_recon_ae_indivisible_length_rejected():
    cfg = AEConfig(variant="reconstruction", encoder_layers=3, seed=5)
    with pytest.raises(ValueError, match="divisible"):
        build_recon_ae(cfg, 100, 6)


def test_feasible_encoder_layers_clamp():
    assert feasible_encoder_layers(100, 2, 4) == 2
    assert feasible_encoder_layers(100, 2, 2) == 2
    assert feasible_encoder_layers(96, 2, 4) == 4


def test_recon_ae_output_shape_various_configs():
    for layers, filters in ((1, 8), (2, 4)):
        cfg = AEConfig(variant="reconstruction", encoder_layers=layers,
                       filters=filters, seed=6)
        model = build_recon_ae(cfg, 100, 6)
        assert reconstruct(model, np.zeros((100, 6))).shape == (100, 6)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def test_train_constant_corpus_reaches_small_loss():
    windows = [constant_window() for _ in range(50)]
    cfg = AEConfig(variant="t2v", k=3, decoder_layers=1, filters=4, epochs=200,
                   batch=8, seed=7)
    model = train(build_t2v_ae(cfg, 100, 6), windows)
    assert model.loss_curve[-1] < 1e-3


def test_train_halves_loss_on_synthetic_corpus(small_corpus):
    cfg = AEConfig(variant="t2v", epochs=20, batch=8, seed=8)
    model = train(build_t2v_ae(cfg, 100, 6), small_corpus.train_windows)
    assert model.loss_curve[-1] < 0.5 * model.loss_curve[0]
    assert len(model.loss_curve) == cfg.epochs


def test_train_deterministic(small_corpus):
    def run():
        cfg = AEConfig(variant="t2v", epochs=3, seed=9)
        return train(build_t2v_ae(cfg, 100, 6), small_corpus.train_windows).loss_curve
    assert run() == run()


def test_train_rejects_wrong_window_shape():
    cfg = AEConfig(variant="t2v", seed=10)
    model = build_t2v_ae(cfg, 100, 6)
    with pytest.raises(ValueError, match="expects"):
        train(model, [Window(np.zeros((100, 4)))])


def test_train_aborts_on_nonfinite_loss():
    from t2vad.autoenc import TrainingDiverged
    cfg = AEConfig(variant="t2v", k=3, decoder_layers=1, epochs=2, seed=12)
    model = build_t2v_ae(cfg, 100, 6)
    bad = np.zeros((100, 6))
    bad[0, 0] = np.nan
    windows = [Window(bad)] * 4
    with pytest.raises(TrainingDiverged, match="epoch 0"):
        train(model, windows)


def test_loss_curve_smoothed_non_increasing(small_corpus):
    cfg = AEConfig(variant="reconstruction", epochs=20, seed=11)
    model = train(build_recon_ae(cfg, 100, 6), small_corpus.train_windows)
    curve = np.array(model.loss_curve)
    means = curve.reshape(4, 5).mean(axis=1)
    assert np.all(np.diff(means) <= 1e-12)


# ---------------------------------------------------------------------------
# embed / reconstruct
# ---------------------------------------------------------------------------

def test_embed_reference_length_and_purity(small_e2e):
    model = small_e2e["t2v_model"]
    w = small_e2e["corpus"].windows[0]
    e1 = embed(model, w)
    e2 = embed(model, w)
    assert e1.shape == (700,)
    assert np.array_equal(e1, e2)


def test_embed_rejects_reconstruction_variant(small_e2e):
    with pytest.raises(ValueError, match="t2v variant"):
        embed(small_e2e["recon_model"], small_e2e["corpus"].windows[0])


def test_embed_many_matches_single(small_e2e):
    model = small_e2e["t2v_model"]
    ws = small_e2e["corpus"].test_windows[:3]
    batch = embed_many(model, ws)
    for i, w in enumerate(ws):
        np.testing.assert_array_equal(batch[i], embed(model, w))


def test_padded_rows_differ_only_via_bias_terms():
    """Rows holding the same (padded) value get identical X*w products, so any
    difference between their embedding rows traces back to the row biases."""
    rng = make_rng(12)
    model = build_t2v_ae(AEConfig(variant="t2v", k=4, seed=13), 100, 6)
    t2v = model.stack.layers[0]
    t2v.b0[...] = rng.normal(size=(100, 1))
    t2v.b[...] = rng.normal(size=(100, 3))
    data = rng.normal(size=(100, 6))
    data[90:] = data[89]              # padded tail
    w = Window(data, tags={"padded"})
    emb = embed(model, w).reshape(100, 4)
    for row in range(91, 100):
        base = data[90] @ t2v.w0[:, 0]
        assert emb[row, 0] - emb[90, 0] == pytest.approx(
            float(t2v.b0[row, 0] - t2v.b0[90, 0]), abs=1e-12)
        pre_base = data[90] @ t2v.w
        np.testing.assert_allclose(
            emb[row, 1:], np.sin(pre_base + t2v.b[row]), atol=1e-12)
        assert emb[90, 0] == pytest.approx(float(base + t2v.b0[90, 0]), abs=1e-12)


def test_trained_model_beats_untrained_on_dtw(small_corpus):
    cfg = AEConfig(variant="reconstruction", epochs=8, seed=14)
    trained = train(build_recon_ae(cfg, 100, 6), small_corpus.train_windows)
    untrained = build_recon_ae(AEConfig(variant="reconstruction", seed=15), 100, 6)
    probe = small_corpus.test_windows[:6]
    assert validation_dtw(trained, probe) < validation_dtw(untrained, probe)


def test_trained_on_constant_reconstructs_constant():
    windows = [constant_window(0.3) for _ in range(40)]
    cfg = AEConfig(variant="t2v", k=3, decoder_layers=1, filters=4, epochs=150,
                   batch=16, seed=16)
    model = train(build_t2v_ae(cfg, 100, 6), windows)
    xhat = reconstruct(model, windows[0])
    assert np.mean(np.abs(xhat - windows[0].data)) < 0.05


def test_reconstruct_finite_on_corpus(small_e2e):
    for w in small_e2e["corpus"].test_windows:
        assert np.all(np.isfinite(reconstruct(small_e2e["t2v_model"], w)))


# ---------------------------------------------------------------------------
# composite score
# ---------------------------------------------------------------------------

def test_recon_score_zero_at_component_means(small_e2e):
    model = small_e2e["recon_model"]
    w = small_e2e["corpus"].train_windows[0]
    calib = calibrate(model, [w])    # single window: means are its components
    assert recon_score(model, w, calib) == pytest.approx(0.0, abs=1e-6)


def test_recon_score_training_mean_near_zero(small_e2e):
    model = small_e2e["recon_model"]
    calib = small_e2e["calib"]
    scores = [recon_score(model, w, calib)
              for w in small_e2e["corpus"].train_windows]
    assert abs(np.mean(scores)) < 0.1


def test_recon_score_monotone_in_each_component():
    calib = ScoreCalibration(np.array([1.0, 2.0, 3.0]), np.array([0.5, 1.0, 2.0]),
                             threshold=0.0, threshold_quantile=0.99)
    base = combine_components(np.array([1.0, 2.0, 3.0]), calib)
    for i in range(3):
        comps = np.array([1.0, 2.0, 3.0])
        comps[i] += 0.7
        assert combine_components(comps, calib) > base


def test_recon_score_requires_calibration(small_e2e):
    with pytest.raises(ValueError, match="calibration"):
        recon_score(small_e2e["recon_model"], small_e2e["corpus"].windows[0], None)


def test_big_step_scores_above_training_quantile(small_e2e):
    model = small_e2e["recon_model"]
    calib = small_e2e["calib"]
    corpus = small_e2e["corpus"]
    w = corpus.test_windows[0]
    sigma = w.data.std(axis=0)
    from t2vad.inject import inject_step
    spiked = inject_step(w, list(range(6)), onset=30,
                         magnitude_per_feature=10.0 * sigma)
    train_scores = [recon_score(model, tw, calib) for tw in corpus.train_windows]
    assert recon_score(model, spiked, calib) > np.quantile(train_scores, 0.99)


def test_score_components_are_mse_mae_dtw(small_e2e):
    model = small_e2e["recon_model"]
    w = small_e2e["corpus"].test_windows[0]
    comps = score_components(model, w)
    xhat = reconstruct(model, w)
    assert comps[0] == pytest.approx(np.mean((xhat - w.data) ** 2))
    assert comps[1] == pytest.approx(np.mean(np.abs(xhat - w.data)))
    assert comps[2] == pytest.approx(dtw_distance(w.data, xhat))


# ---------------------------------------------------------------------------
# hyperparameter search
# ---------------------------------------------------------------------------

def test_search_single_trial_is_best(small_corpus):
    windows = small_corpus.train_windows[:20]
    res = hyper_search(windows, "t2v", n_trials=1, master_seed=17, space=TINY_SPACE)
    assert res.best_index == 0
    assert res.best_score == res.trials[0][1]


def test_search_deterministic(small_corpus):
    windows = small_corpus.train_windows[:20]
    a = hyper_search(windows, "t2v", 3, master_seed=18, space=TINY_SPACE)
    b = hyper_search(windows, "t2v", 3, master_seed=18, space=TINY_SPACE)
    assert [(c, s) for c, s in a.trials] == [(c, s) for c, s in b.trials]


def test_search_argmin_at_most_median(small_corpus):
    windows = small_corpus.train_windows[:20]
    res = hyper_search(windows, "t2v", 6, master_seed=19, space=TINY_SPACE)
    scores = [s for _, s in res.trials]
    assert res.best_score <= np.median(scores)
    assert res.best_score == min(scores)


def test_search_reconstruction_variant_clamps_layers(small_corpus):
    windows = small_corpus.train_windows[:20]
    space = SearchSpace(k=(2, 3), layers=(3, 4), kernels=(3,), filters=(4,),
                        epochs=(2, 2), batches=(8,))
    res = hyper_search(windows, "reconstruction", 2, master_seed=20, space=space)
    for cfg, _ in res.trials:
        assert 100 % (cfg.encoder_stride ** cfg.encoder_layers) == 0


def test_search_rejects_bad_trial_count(small_corpus):
    with pytest.raises(ValueError, match="n_trials"):
        hyper_search(small_corpus.train_windows[:20], "t2v", 0, master_seed=0)


# ---------------------------------------------------------------------------
# gradient checks on the full architectures
# ---------------------------------------------------------------------------

def test_grad_check_full_t2v_ae_toy():
    cfg = AEConfig(variant="t2v", k=3, decoder_layers=3, filters=4, kernel=3, seed=2)
    model = build_t2v_ae(cfg, 10, 2)
    rng = make_rng(2002)
    assert nd.grad_check(model.stack, rng.normal(size=(1, 10, 2)),
                         rng.normal(size=(1, 10, 2))) < 1e-4


def test_grad_check_full_recon_ae_toy():
    # piecewise-linear net: central differences are exact unless the stencil
    # straddles a ReLU kink, so the seed keeps pre-activations away from 0
    cfg = AEConfig(variant="reconstruction", encoder_layers=2, filters=4, kernel=3,
                   seed=5)
    model = build_recon_ae(cfg, 12, 2)
    rng = make_rng(1005)
    assert nd.grad_check(model.stack, rng.normal(size=(1, 12, 2)),
                         rng.normal(size=(1, 12, 2))) < 1e-4
