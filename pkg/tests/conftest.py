import pytest

from t2vad import detect
from t2vad.autoenc import (AEConfig, build_recon_ae, build_t2v_ae, calibrate,
                           embed_many, train)
from t2vad.inject import InjectionSpec, build_testsets
from t2vad.pipeline import SynthParams, synth_generate


@pytest.fixture(scope="session")
def small_corpus():
    """60 synthetic windows: 48 train (every detector's minimum n), 12 test
    (enough for the injection protocol)."""
    return synth_generate(SynthParams(n_windows=60, test_fraction=0.2), seed=101)


@pytest.fixture(scope="session")
def small_e2e(small_corpus):
    """Tiny but complete pipeline: both AEs, calibration, detectors, suite."""
    corpus = small_corpus
    t2v_model = train(build_t2v_ae(AEConfig(variant="t2v", epochs=4, seed=7), 100, 6),
                      corpus.train_windows)
    recon_model = train(
        build_recon_ae(AEConfig(variant="reconstruction", epochs=4, seed=8), 100, 6),
        corpus.train_windows)
    calib = calibrate(recon_model, corpus.train_windows)
    emb = embed_many(t2v_model, corpus.train_windows)
    cfg = detect.DetectorConfig(svdd_epochs=10, ee_n_starts=10, seed=9)
    detectors = {kind: detect.fit(kind, emb, cfg) for kind in detect.KINDS}
    suite = build_testsets(corpus.test_windows, InjectionSpec(seed=10))
    return {
        "corpus": corpus,
        "t2v_model": t2v_model,
        "recon_model": recon_model,
        "calib": calib,
        "detectors": detectors,
        "suite": suite,
    }
