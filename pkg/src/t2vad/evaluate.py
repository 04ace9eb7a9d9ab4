"""Confusion-matrix metrics and the benchmark report.

Compares the baseline composite-reconstruction detector against the
embedding path (each one-class detector on top of the embedding AE) over
the four evaluation sets. Anomalous is the positive class. The report is
a pure function of its inputs: same suite, models, detectors and config
give an identical report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import detect
from .autoenc import ScoreCalibration, TrainedModel, embed_many, recon_score
from .inject import TestSuite

METHOD_BASELINE = "recon_ae"


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass
class EvalReport:
    """Per (method, test set) precision/recall/F1 plus provenance."""

    results: dict[str, dict[str, dict]]
    composition: dict[str, dict]
    config_digest: str = ""
    seeds: dict = field(default_factory=dict)
    timestamp: str | None = None   # None by default: reruns must be byte-identical


def confusion(preds, labels) -> Confusion:
    """Tally counts with 'anomalous' as the positive class."""
    preds = list(preds)
    labels = list(labels)
    if len(preds) != len(labels):
        raise ValueError(f"length mismatch: {len(preds)} preds vs {len(labels)} labels")
    tp = fp = tn = fn = 0
    for p, l in zip(preds, labels):
        pa = p == "anomalous"
        la = l == "anomalous"
        if pa and la:
            tp += 1
        elif pa and not la:
            fp += 1
        elif not pa and la:
            fn += 1
        else:
            tn += 1
    return Confusion(tp, fp, tn, fn)


def prf1(c: Confusion) -> tuple[float, float, float]:
    """(precision, recall, f1); any 0/0 is 0 by convention."""
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return precision, recall, f1


def _set_composition(windows) -> dict:
    return {
        "n": len(windows),
        "anomalous": sum(1 for w in windows if w.label == "anomalous"),
        "noise_tagged": sum(1 for w in windows
                            if w.tags & {"point_noise", "salt_pepper"}),
    }


def run_benchmark(suite: TestSuite, t2v_model: TrainedModel, recon_model: TrainedModel,
                  recon_calib: ScoreCalibration,
                  detectors: dict[str, detect.DetectorModel],
                  config_digest: str = "", seeds: dict | None = None) -> EvalReport:
    """Evaluate the baseline plus every detector over all four test sets."""
    if t2v_model is None or recon_model is None:
        raise ValueError("missing trained model")
    if recon_calib is None:
        raise ValueError("missing baseline score calibration")
    missing = [k for k in detect.KINDS if k not in detectors]
    if missing:
        raise ValueError(f"missing detectors: {missing}")

    results: dict[str, dict[str, dict]] = {METHOD_BASELINE: {}}
    for kind in detect.KINDS:
        results[f"t2v_{kind}"] = {}
    composition = {}

    for key in TestSuite.KEYS:
        windows = suite.sets[key]
        labels = [w.label for w in windows]
        composition[key] = _set_composition(windows)

        base_preds = ["anomalous" if recon_score(recon_model, w, recon_calib)
                      > recon_calib.threshold else "normal" for w in windows]
        results[METHOD_BASELINE][key] = _entry(confusion(base_preds, labels))

        embeddings = embed_many(t2v_model, windows)
        for kind in detect.KINDS:
            preds = detect.predict_many(detectors[kind], embeddings)
            results[f"t2v_{kind}"][key] = _entry(confusion(preds, labels))

    return EvalReport(results, composition, config_digest, dict(seeds or {}))


def _entry(c: Confusion) -> dict:
    p, r, f1 = prf1(c)
    return {
        "precision": p,
        "recall": r,
        "f1": f1,
        "confusion": {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn},
    }


# ---------------------------------------------------------------------------
# text rendering
# ---------------------------------------------------------------------------

_METHOD_TITLES = {
    METHOD_BASELINE: "Reconstruction AE (baseline)",
    "t2v_iforest": "T2V embeddings + IF",
    "t2v_ee": "T2V embeddings + EE",
    "t2v_ocsvm": "T2V embeddings + OCSVM",
    "t2v_lof": "T2V embeddings + LOF",
    "t2v_deep_svdd": "T2V embeddings + Deep SVDD",
}

_BANDS = [
    (METHOD_BASELINE, "t2v_iforest"),
    ("t2v_ee", "t2v_ocsvm"),
    ("t2v_lof", "t2v_deep_svdd"),
]


def _fmt(v: float) -> str:
    """Compact metric formatting (1, 0.99, 0.5): no trailing zeros."""
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return s if s else "0"


def format_report_table(report: EvalReport) -> str:
    """Aligned text table: three bands of two methods, one row per test set."""
    col = 10
    lines = []
    for left, right in _BANDS:
        lines.append(f"{'':<{col}}| {_METHOD_TITLES[left]:^{3 * col}}| "
                     f"{_METHOD_TITLES[right]:^{3 * col}}")
        header = ["Test Set", "F1", "Prec", "Recall", "F1", "Prec", "Recall"]
        lines.append(f"{header[0]:<{col}}|" +
                     "".join(f"{h:^{col}}" for h in header[1:4]) + "|" +
                     "".join(f"{h:^{col}}" for h in header[4:]))
        lines.append("-" * (col * 7 + 2))
        for key in TestSuite.KEYS:
            row = [key]
            for method in (left, right):
                e = report.results[method][key]
                row += [_fmt(e["f1"]), _fmt(e["precision"]), _fmt(e["recall"])]
            lines.append(f"{row[0]:<{col}}|" +
                         "".join(f"{v:^{col}}" for v in row[1:4]) + "|" +
                         "".join(f"{v:^{col}}" for v in row[4:]))
        lines.append("")
    return "\n".join(lines)
