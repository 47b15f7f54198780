"""JSON persistence for trained models.

Floats survive json round-trips exactly (repr-based), so a loaded model
reproduces bit-identical predictions.
"""

import json
from pathlib import Path

import numpy as np

from .errors import ModelFormatError
from .forest import DecisionTree, RandomForestModel
from .svr import SvrModel

SCHEMA_VERSION = 1


def model_to_dict(model) -> dict:
    if isinstance(model, RandomForestModel):
        kind = "random-forest"
        hyper = dict(model.hyperparameters)
        payload = {
            "seed": model.seed,
            "n_samples": model.n_samples,
            "bootstrap": model.bootstrap,
            "trees": [t.to_lists() for t in model.trees],
        }
        target = model.target_name
        resolution = model.resolution_tag
        feature_names = list(model.feature_names)
    elif isinstance(model, SvrModel):
        kind = "svr"
        hyper = {"C": model.C, "epsilon": model.epsilon, "gamma": model.gamma}
        payload = {
            "support_vectors": model.support_vectors.tolist(),
            "dual_coefficients": model.dual_coefficients.tolist(),
            "bias": model.bias,
            "feature_mean": model.feature_mean.tolist(),
            "feature_scale": model.feature_scale.tolist(),
            "converged": model.converged,
            "kkt_violation": model.kkt_violation,
            "iterations": model.iterations,
        }
        target = "c_T"
        resolution = ""
        feature_names = list(model.feature_names) if model.feature_names else None
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "resolution_tag": resolution,
        "target": target,
        "hyperparameters": hyper,
        "feature_names": feature_names,
        "payload": payload,
    }


def model_from_dict(doc: dict):
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise ModelFormatError("not a model file (no schema_version)")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ModelFormatError(
            f"unsupported model schema version {doc['schema_version']!r}, "
            f"expected {SCHEMA_VERSION}"
        )
    kind = doc.get("kind")
    try:
        payload = doc["payload"]
        if kind == "random-forest":
            return RandomForestModel(
                trees=[DecisionTree.from_lists(t) for t in payload["trees"]],
                hyperparameters=dict(doc["hyperparameters"]),
                feature_names=tuple(doc["feature_names"]),
                target_name=doc["target"],
                resolution_tag=doc["resolution_tag"],
                seed=payload["seed"],
                n_samples=payload["n_samples"],
                bootstrap=payload["bootstrap"],
            )
        if kind == "svr":
            names = doc.get("feature_names")
            d = len(payload["feature_mean"])
            return SvrModel(
                support_vectors=np.asarray(
                    payload["support_vectors"], dtype=np.float64
                ).reshape(-1, d),
                dual_coefficients=np.asarray(
                    payload["dual_coefficients"], dtype=np.float64
                ),
                bias=payload["bias"],
                gamma=doc["hyperparameters"]["gamma"],
                C=doc["hyperparameters"]["C"],
                epsilon=doc["hyperparameters"]["epsilon"],
                feature_mean=np.asarray(payload["feature_mean"], dtype=np.float64),
                feature_scale=np.asarray(payload["feature_scale"], dtype=np.float64),
                feature_names=tuple(names) if names else None,
                converged=payload["converged"],
                kkt_violation=payload["kkt_violation"],
                iterations=payload["iterations"],
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"corrupt {kind or 'model'} file: {exc}")
    raise ModelFormatError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model)) + "\n")


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}")
    return model_from_dict(doc)
