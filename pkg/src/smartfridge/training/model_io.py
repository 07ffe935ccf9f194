"""Versioned JSON serialization of trained models.

The document bundles the weights with the loss configuration and the dataset
spec that produced them, which is everything the device simulator needs to
synthesize features and score them.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dataset import DatasetSpec
from .trainer import EpochRecord, LinearLossClassifier

FORMAT_VERSION = 1


def model_to_json_dict(clf: LinearLossClassifier, spec: DatasetSpec) -> dict:
    cfg = clf.loss_config_
    doc = {
        "formatVersion": FORMAT_VERSION,
        "loss": {
            "kind": cfg.kind.value,
            "gamma": cfg.gamma,
            "lambda": cfg.lambda_,
            "nBins": cfg.n_bins,
            "gammaClamp": list(cfg.gamma_clamp),
        },
        "epochs": clf.epochs,
        "lr": clf.lr,
        "weights": [[float(v) for v in row] for row in clf.weights_],
        "spec": spec.to_json_dict(),
        "curves": [
            {
                "epoch": r.epoch,
                "trainLoss": r.train_loss,
                "valLoss": r.val_loss,
                "valAccuracy": r.val_accuracy,
                "valEce": r.val_ece,
            }
            for r in clf.curves_
        ],
    }
    if clf.gamma_history_:
        doc["gammaHistory"] = [list(g) for g in clf.gamma_history_]
    return doc


def save_model(clf: LinearLossClassifier, spec: DatasetSpec, path) -> None:
    Path(path).write_text(
        json.dumps(model_to_json_dict(clf, spec), sort_keys=True, indent=2) + "\n"
    )


def model_from_json_dict(doc: dict) -> tuple[LinearLossClassifier, DatasetSpec]:
    version = doc.get("formatVersion")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    spec = DatasetSpec.from_json_dict(doc["spec"])
    loss = doc["loss"]
    clf = LinearLossClassifier(
        loss=loss["kind"],
        gamma=loss["gamma"],
        lambda_=loss["lambda"],
        n_bins=loss["nBins"],
        gamma_clamp=tuple(loss["gammaClamp"]),
        epochs=doc["epochs"],
        lr=doc["lr"],
        n_classes=spec.n_classes,
    )
    clf.weights_ = np.asarray(doc["weights"], dtype=np.float64)
    clf.n_classes_ = spec.n_classes
    clf.classes_ = np.arange(spec.n_classes)
    clf.n_features_in_ = clf.weights_.shape[1] - 1
    clf.loss_config_ = clf._loss_config()
    clf.curves_ = [
        EpochRecord(
            epoch=c["epoch"],
            train_loss=c["trainLoss"],
            val_loss=c["valLoss"],
            val_accuracy=c["valAccuracy"],
            val_ece=c["valEce"],
        )
        for c in doc.get("curves", [])
    ]
    clf.gamma_history_ = [tuple(g) for g in doc["gammaHistory"]] if "gammaHistory" in doc else None
    return clf, spec


def load_model(path) -> tuple[LinearLossClassifier, DatasetSpec]:
    return model_from_json_dict(json.loads(Path(path).read_text()))
