"""On-disk formats: corpus, test suite, model, detector and report files.

Everything is a single JSON document with a human-readable header;
numeric payloads are base64-encoded little-endian float64 blocks. Every
file carries a SHA-256 checksum over its canonical JSON (sorted keys,
minimal separators) so truncation or corruption fails loudly on load.
Writes are atomic (temp file + rename): a failed command leaves no
partial output.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import tempfile
from dataclasses import asdict

import numpy as np

from . import ndtensor as nd
from .autoenc import AEConfig, ScoreCalibration, TrainedModel
from .detect import DetectorConfig, DetectorModel
from .evaluate import EvalReport
from .inject import TestSuite
from .pipeline import Corpus, Window
from .t2v import T2VLayer

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """File kind/version does not match what the loader expects."""


class ChecksumError(ValueError):
    """Stored checksum does not match the document content."""


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def encode_array(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=np.float64)
    return {
        "shape": list(a.shape),
        "dtype": "float64",
        "data": base64.b64encode(a.astype("<f8").tobytes()).decode("ascii"),
    }


def decode_array(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    arr = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    return arr.reshape(d["shape"])


def _canonical(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _with_checksum(doc: dict) -> dict:
    doc = dict(doc)
    doc.pop("checksum", None)
    doc["checksum"] = hashlib.sha256(_canonical(doc).encode()).hexdigest()
    return doc


def atomic_write_json(path: str, doc: dict) -> None:
    doc = _with_checksum(doc)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json_checked(path: str, expected_kind: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ChecksumError(f"{path}: not a valid document ({exc})") from None
    if doc.get("kind") != expected_kind:
        raise SchemaError(f"{path}: expected a {expected_kind} file, got {doc.get('kind')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"{path}: schema version {doc.get('schema_version')} "
                          f"unsupported (want {SCHEMA_VERSION})")
    stored = doc.get("checksum")
    body = {k: v for k, v in doc.items() if k != "checksum"}
    actual = hashlib.sha256(_canonical(body).encode()).hexdigest()
    if stored != actual:
        raise ChecksumError(f"{path}: checksum mismatch")
    return doc


def config_digest(config: dict) -> str:
    return hashlib.sha256(_canonical(config).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# corpus / test suite
# ---------------------------------------------------------------------------

def _windows_block(windows: list[Window]) -> dict:
    return {
        "labels": [w.label for w in windows],
        "tags": [sorted(w.tags) for w in windows],
        "origins": [w.origin for w in windows],
        "payload": encode_array(np.stack([w.data for w in windows])),
    }


def _windows_from_block(block: dict) -> list[Window]:
    data = decode_array(block["payload"])
    return [
        Window(data[i], label=block["labels"][i], tags=frozenset(block["tags"][i]),
               origin=block["origins"][i])
        for i in range(len(data))
    ]


def save_corpus(path: str, corpus: Corpus) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "corpus",
        "n_windows": len(corpus.windows),
        "steps": corpus.windows[0].data.shape[0],
        "features": corpus.windows[0].data.shape[1],
        "provenance": corpus.provenance,
        "split": {"train": corpus.train_idx, "test": corpus.test_idx},
        "windows": _windows_block(corpus.windows),
    }
    atomic_write_json(path, doc)


def load_corpus(path: str) -> Corpus:
    doc = load_json_checked(path, "corpus")
    return Corpus(_windows_from_block(doc["windows"]),
                  doc["split"]["train"], doc["split"]["test"], doc["provenance"])


def save_testsuite(path: str, suite: TestSuite) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "testsuite",
        "seed": suite.seed,
        "sets": {key: _windows_block(ws) for key, ws in suite.sets.items()},
    }
    atomic_write_json(path, doc)


def load_testsuite(path: str) -> TestSuite:
    doc = load_json_checked(path, "testsuite")
    return TestSuite({k: _windows_from_block(b) for k, b in doc["sets"].items()},
                     seed=doc["seed"])


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

def _layer_doc(layer: nd.Layer) -> dict:
    return {
        "kind": layer.kind,
        "hyperparams": layer.hyperparams(),
        "params": {name: encode_array(arr) for name, arr in layer.params().items()},
    }


def _layer_from_doc(doc: dict) -> nd.Layer:
    kind = doc["kind"]
    hp = doc["hyperparams"]
    if kind == "t2v":
        layer: nd.Layer = T2VLayer(hp["n"], hp["f"], hp["k"])
    elif kind == "conv1d":
        layer = nd.Conv1d(hp["c_in"], hp["c_out"], hp["k"], hp["stride"])
    elif kind == "dense":
        layer = nd.Dense(hp["d_in"], hp["d_out"], hp["use_bias"])
    elif kind == "relu":
        layer = nd.ReLU()
    elif kind == "sin":
        layer = nd.Sin()
    elif kind == "flatten":
        layer = nd.Flatten()
    elif kind == "reshape":
        layer = nd.Reshape(hp["n"], hp["k"])
    elif kind == "upsample":
        layer = nd.Upsample(hp["factor"])
    else:
        raise SchemaError(f"unknown layer kind {kind!r}")
    for name, enc in doc["params"].items():
        arr = layer.params()[name]
        arr[...] = decode_array(enc)
    return layer


def save_model(path: str, model: TrainedModel,
               calibration: ScoreCalibration | None = None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "model",
        "variant": model.config.variant,
        "n": model.n,
        "f": model.f,
        "config": asdict(model.config),
        "encoder_strides": model.encoder_strides,
        "loss_curve": model.loss_curve,
        "val_dtw": model.val_dtw,
        "layers": [_layer_doc(layer) for layer in model.stack.layers],
        "calibration": None if calibration is None else {
            "means": encode_array(calibration.means),
            "stds": encode_array(calibration.stds),
            "threshold": calibration.threshold,
            "threshold_quantile": calibration.threshold_quantile,
        },
    }
    atomic_write_json(path, doc)


def load_model(path: str) -> tuple[TrainedModel, ScoreCalibration | None]:
    doc = load_json_checked(path, "model")
    cfg = AEConfig(**doc["config"])
    stack = nd.LayerStack([_layer_from_doc(d) for d in doc["layers"]])
    model = TrainedModel(cfg, stack, doc["n"], doc["f"], doc["loss_curve"],
                         doc["val_dtw"], doc["encoder_strides"])
    calib = None
    if doc["calibration"] is not None:
        c = doc["calibration"]
        calib = ScoreCalibration(decode_array(c["means"]), decode_array(c["stds"]),
                                 c["threshold"], c["threshold_quantile"])
    return model, calib


# ---------------------------------------------------------------------------
# detectors
# ---------------------------------------------------------------------------

def _detector_state_doc(kind: str, state: dict) -> dict:
    if kind == "iforest":
        return {"trees": state["trees"], "subsample": state["subsample"]}
    if kind == "lof":
        return {"x": encode_array(state["x"]), "k": state["k"],
                "kdist": encode_array(state["kdist"]), "lrd": encode_array(state["lrd"]),
                "train_lof": encode_array(state["train_lof"])}
    if kind == "ocsvm":
        return {"sv": encode_array(state["sv"]), "alpha": encode_array(state["alpha"]),
                "alpha_full": encode_array(state["alpha_full"]), "rho": state["rho"],
                "gamma": state["gamma"], "nu": state["nu"], "box": state["box"],
                "iterations": state["iterations"]}
    if kind == "ee":
        return {"mu": encode_array(state["mu"]), "cov": encode_array(state["cov"]),
                "h": state["h"]}
    return {"widths": state["widths"], "center": encode_array(state["center"]),
            "layers": [_layer_doc(layer) for layer in state["net"].layers]}


def _detector_state_from_doc(kind: str, doc: dict) -> dict:
    if kind == "iforest":
        return {"trees": doc["trees"], "subsample": doc["subsample"]}
    if kind == "lof":
        return {"x": decode_array(doc["x"]), "k": doc["k"],
                "kdist": decode_array(doc["kdist"]), "lrd": decode_array(doc["lrd"]),
                "train_lof": decode_array(doc["train_lof"])}
    if kind == "ocsvm":
        return {"sv": decode_array(doc["sv"]), "alpha": decode_array(doc["alpha"]),
                "alpha_full": decode_array(doc["alpha_full"]), "rho": doc["rho"],
                "gamma": doc["gamma"], "nu": doc["nu"], "box": doc["box"],
                "iterations": doc["iterations"]}
    if kind == "ee":
        return {"mu": decode_array(doc["mu"]), "cov": decode_array(doc["cov"]),
                "h": doc["h"]}
    return {"widths": doc["widths"], "center": decode_array(doc["center"]),
            "net": nd.LayerStack([_layer_from_doc(d) for d in doc["layers"]])}


def save_detector(path: str, model: DetectorModel) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "detector",
        "detector": model.kind,
        "scaler_mean": encode_array(model.scaler_mean),
        "scaler_std": encode_array(model.scaler_std),
        "pca_basis": None if model.pca_basis is None else encode_array(model.pca_basis),
        "pca_mean": None if model.pca_mean is None else encode_array(model.pca_mean),
        "threshold": model.threshold,
        "threshold_quantile": model.threshold_quantile,
        "train_scores": encode_array(model.train_scores),
        "config": asdict(model.config),
        "seed": model.seed,
        "state": _detector_state_doc(model.kind, model.state),
    }
    atomic_write_json(path, doc)


def load_detector(path: str) -> DetectorModel:
    doc = load_json_checked(path, "detector")
    kind = doc["detector"]
    cfg_dict = dict(doc["config"])
    cfg_dict["svdd_widths"] = tuple(cfg_dict["svdd_widths"])
    return DetectorModel(
        kind,
        decode_array(doc["scaler_mean"]),
        decode_array(doc["scaler_std"]),
        _detector_state_from_doc(kind, doc["state"]),
        doc["threshold"],
        doc["threshold_quantile"],
        decode_array(doc["train_scores"]),
        None if doc["pca_basis"] is None else decode_array(doc["pca_basis"]),
        None if doc["pca_mean"] is None else decode_array(doc["pca_mean"]),
        DetectorConfig(**cfg_dict),
        doc["seed"],
    )


# ---------------------------------------------------------------------------
# embeddings / reports
# ---------------------------------------------------------------------------

def save_embeddings(path: str, embeddings: np.ndarray, meta: dict) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "embeddings",
        "meta": meta,
        "payload": encode_array(embeddings),
    }
    atomic_write_json(path, doc)


def load_embeddings(path: str) -> tuple[np.ndarray, dict]:
    doc = load_json_checked(path, "embeddings")
    return decode_array(doc["payload"]), doc["meta"]


def save_report(path: str, report: EvalReport) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "report",
        "config_digest": report.config_digest,
        "seeds": report.seeds,
        "composition": report.composition,
        "results": report.results,
        "timestamp": report.timestamp,
    }
    atomic_write_json(path, doc)


def load_report(path: str) -> EvalReport:
    doc = load_json_checked(path, "report")
    return EvalReport(doc["results"], doc["composition"], doc["config_digest"],
                      doc["seeds"], doc["timestamp"])
