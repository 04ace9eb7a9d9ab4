import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from t2vad.evaluate import (Confusion, EvalReport, confusion, format_report_table,
                            prf1, run_benchmark)
from t2vad.inject import TestSuite


# ---------------------------------------------------------------------------
# confusion
# ---------------------------------------------------------------------------

def test_confusion_all_correct():
    c = confusion(["anomalous", "normal"], ["anomalous", "normal"])
    assert (c.tp, c.fp, c.tn, c.fn) == (1, 0, 1, 0)


def test_confusion_constant_normal_predictor():
    labels = ["anomalous"] * 5 + ["normal"] * 5
    c = confusion(["normal"] * 10, labels)
    assert c.fn == 5 and c.tn == 5 and c.tp == 0 and c.fp == 0


def test_confusion_hand_tallied_eight_elements():
    preds = ["anomalous", "normal", "anomalous", "normal",
             "anomalous", "anomalous", "normal", "normal"]
    labels = ["anomalous", "anomalous", "normal", "normal",
              "anomalous", "normal", "anomalous", "normal"]
    # manual tally: tp rows 0,4; fp rows 2,5; fn rows 1,6; tn rows 3,7
    c = confusion(preds, labels)
    assert (c.tp, c.fp, c.tn, c.fn) == (2, 2, 2, 2)
    assert c.total == 8


def test_confusion_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        confusion(["normal"], ["normal", "normal"])


def test_confusion_rejects_negative():
    with pytest.raises(ValueError):
        Confusion(tp=-1)


# ---------------------------------------------------------------------------
# prf1
# ---------------------------------------------------------------------------

def test_prf1_hand_example():
    p, r, f1 = prf1(Confusion(tp=2, fp=1, tn=0, fn=1))
    assert p == 2 / 3 and r == 2 / 3 and f1 == 2 / 3


def test_prf1_degenerate_zero_convention():
    assert prf1(Confusion(tp=0, fp=0, tn=5, fn=0)) == (0.0, 0.0, 0.0)


def test_prf1_table_formats_like_reference_row():
    # a perfect-precision row renders as 1 / 0.99 / 0.99
    entry = {"precision": 1.0, "recall": 0.99, "f1": 0.99,
             "confusion": {"tp": 99, "fp": 0, "tn": 100, "fn": 1}}
    results = {m: {k: entry for k in TestSuite.KEYS}
               for m in ("recon_ae", "t2v_iforest", "t2v_ee", "t2v_ocsvm",
                         "t2v_lof", "t2v_deep_svdd")}
    table = format_report_table(EvalReport(results, {}))
    row = [line for line in table.splitlines() if line.startswith("A-6F")][0]
    cells = [c.strip() for c in row.replace("|", " ").split()]
    assert cells[1:4] == ["0.99", "1", "0.99"]   # F1, precision, recall


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
@settings(max_examples=100, deadline=None)
def test_prf1_bounds_and_harmonic_identity(tp, fp, tn, fn):
    p, r, f1 = prf1(Confusion(tp, fp, tn, fn))
    assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0 and 0.0 <= f1 <= 1.0
    if p + r > 0:
        assert f1 == 2 * p * r / (p + r)
        assert f1 <= min(2 * p, 2 * r)


@given(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20), st.integers(0, 20))
@settings(max_examples=60, deadline=None)
def test_adding_true_positive_never_decreases_recall(tp, fp, tn, fn):
    _, r0, _ = prf1(Confusion(tp, fp, tn, fn))
    _, r1, _ = prf1(Confusion(tp + 1, fp, tn, fn))
    assert r1 >= r0


# ---------------------------------------------------------------------------
# run_benchmark
# ---------------------------------------------------------------------------

def test_benchmark_grid_has_72_numbers(small_e2e):
    report = run_benchmark(small_e2e["suite"], small_e2e["t2v_model"],
                           small_e2e["recon_model"], small_e2e["calib"],
                           small_e2e["detectors"])
    count = sum(1 for method in report.results.values()
                for entry in method.values()
                for metric in ("precision", "recall", "f1")
                if metric in entry)
    assert count == 6 * 4 * 3 == 72


def test_benchmark_deterministic(small_e2e):
    kw = dict(suite=small_e2e["suite"], t2v_model=small_e2e["t2v_model"],
              recon_model=small_e2e["recon_model"], recon_calib=small_e2e["calib"],
              detectors=small_e2e["detectors"], config_digest="abc")
    a = run_benchmark(**kw)
    b = run_benchmark(**kw)
    assert a.results == b.results
    assert a.composition == b.composition


def test_benchmark_missing_detector_rejected(small_e2e):
    partial = dict(small_e2e["detectors"])
    del partial["lof"]
    with pytest.raises(ValueError, match="missing detectors.*lof"):
        run_benchmark(small_e2e["suite"], small_e2e["t2v_model"],
                      small_e2e["recon_model"], small_e2e["calib"], partial)


def test_benchmark_missing_model_rejected(small_e2e):
    with pytest.raises(ValueError, match="missing trained model"):
        run_benchmark(small_e2e["suite"], None, small_e2e["recon_model"],
                      small_e2e["calib"], small_e2e["detectors"])


def test_benchmark_embeds_suite_composition(small_e2e):
    report = run_benchmark(small_e2e["suite"], small_e2e["t2v_model"],
                           small_e2e["recon_model"], small_e2e["calib"],
                           small_e2e["detectors"])
    for key in TestSuite.KEYS:
        comp = report.composition[key]
        assert comp["n"] == len(small_e2e["suite"].sets[key])
        assert comp["anomalous"] > 0
    assert report.composition["AN-6F"]["noise_tagged"] >= 1
    assert report.composition["A-6F"]["noise_tagged"] == 0


def test_report_timestamp_defaults_to_none(small_e2e):
    report = run_benchmark(small_e2e["suite"], small_e2e["t2v_model"],
                           small_e2e["recon_model"], small_e2e["calib"],
                           small_e2e["detectors"])
    assert report.timestamp is None
