"""JSON documents for datasets, models, predictions and benchmark results.

Every document carries ``format`` and ``version`` keys. Floats are written
with Python's shortest round-trip repr, so values reload bit-exactly. Dataset
matrices may be stored inline or in a delimited text file referenced by
``{"path": ...}`` relative to the document.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .bench import SpaceModel
from .forest import RandomForest
from .product import ProductSignature, as_signature
from .tree import TASKS, DecisionTree

VERSION = 1
DATASET_FORMAT = "mixcurv-dataset"
MODEL_FORMAT = "mixcurv-model"
PREDICTIONS_FORMAT = "mixcurv-predictions"


@dataclass
class LabeledDataset:
    signature: ProductSignature
    X: np.ndarray
    y: np.ndarray
    task: str = "classification"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.signature = as_signature(self.signature)
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y)
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        if self.X.shape[1] != self.signature.width:
            raise ValueError(
                f"dataset has {self.X.shape[1]} columns but '{self.signature}' needs {self.signature.width}"
            )
        if self.y.shape != (self.X.shape[0],):
            raise ValueError("X and y have different numbers of rows")


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def read_json(path, expected_format: Optional[str] = None) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: expected a JSON object")
    if expected_format is not None and doc.get("format") != expected_format:
        raise ValueError(f"{path}: expected format {expected_format!r}, got {doc.get('format')!r}")
    if doc.get("version", VERSION) > VERSION:
        raise ValueError(f"{path}: unsupported version {doc.get('version')}")
    return doc


def _labels_to_json(y: np.ndarray) -> list:
    return y.tolist()


def save_dataset(path, ds: LabeledDataset, matrix_file: Optional[str] = None) -> None:
    """Write ``ds``; with ``matrix_file`` the matrix goes to a CSV next to ``path``."""
    doc = {
        "format": DATASET_FORMAT,
        "version": VERSION,
        "signature": str(ds.signature),
        "task": ds.task,
        "y": _labels_to_json(ds.y),
        "meta": ds.meta,
    }
    if matrix_file is None:
        doc["X"] = ds.X.tolist()
    else:
        base = os.path.dirname(os.path.abspath(path))
        np.savetxt(os.path.join(base, matrix_file), ds.X, delimiter=",", fmt="%.17g")
        doc["X"] = {"path": matrix_file}
    write_json(path, doc)


def load_dataset(path) -> LabeledDataset:
    doc = read_json(path, DATASET_FORMAT)
    try:
        X = doc["X"]
        if isinstance(X, dict):
            ref = os.path.join(os.path.dirname(os.path.abspath(path)), X["path"])
            X = np.loadtxt(ref, delimiter=",", ndmin=2)
        return LabeledDataset(doc["signature"], X, doc["y"], doc.get("task", "classification"), doc.get("meta", {}))
    except KeyError as exc:
        raise ValueError(f"{path}: missing field {exc}") from None


def model_to_dict(model: SpaceModel) -> dict:
    est = model.estimator
    return {
        "format": MODEL_FORMAT,
        "version": VERSION,
        "space": model.space,
        "signature": None if model.signature is None else str(model.signature),
        "kind": "forest" if isinstance(est, RandomForest) else "tree",
        "estimator": est.to_dict(),
    }


def model_from_dict(doc: dict) -> SpaceModel:
    kind = doc.get("kind")
    if kind == "forest":
        est: Union[DecisionTree, RandomForest] = RandomForest.from_dict(doc["estimator"])
    elif kind == "tree":
        est = DecisionTree.from_dict(doc["estimator"])
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    sig = doc.get("signature")
    return SpaceModel(doc.get("space", "product"), None if sig is None else as_signature(sig), est)


def save_model(path, model: SpaceModel) -> None:
    write_json(path, model_to_dict(model))


def load_model(path) -> SpaceModel:
    return model_from_dict(read_json(path, MODEL_FORMAT))


def save_predictions(path, predictions, probabilities=None, classes=None) -> None:
    doc = {"format": PREDICTIONS_FORMAT, "version": VERSION, "predictions": np.asarray(predictions).tolist()}
    if probabilities is not None:
        doc["probabilities"] = np.asarray(probabilities).tolist()
        doc["classes"] = np.asarray(classes).tolist()
    write_json(path, doc)
