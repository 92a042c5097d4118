"""Uniform fit / predict / serialize interface over the six classifier kinds."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np

from ..errors import (
    CorruptModelError,
    DegenerateInputError,
    LengthMismatchError,
    ShapeError,
    SingleClassError,
    VersionError,
)
from ..features import StandardizationParams, apply_standardizer, fit_standardizer
from ..schema import Label
from . import boost, knn, nb, svm, tree

MODEL_FORMAT_VERSION = 1
DEFAULT_THRESHOLD = 0.5
KINDS = ("gaussian_nb", "decision_tree", "random_forest", "linear_svm", "knn", "adaboost")

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "gaussian_nb": {"var_smoothing": 1e-9},
    "decision_tree": {"max_depth": None, "min_samples_split": 2},
    "random_forest": {
        "n_trees": 100,
        "max_features": "sqrt",
        "max_depth": None,
        "min_samples_split": 2,
        "bootstrap": True,
    },
    "linear_svm": {"lam": 1e-4, "epochs": 20, "eta0": 0.1},
    "knn": {"k": 5},
    "adaboost": {"rounds": 50},
}

DISPLAY_NAMES = {
    "gaussian_nb": "Gaussian Classifier",
    "decision_tree": "Decision Tree",
    "random_forest": "Random Forest",
    "linear_svm": "SVM",
    "knn": "K-nearest Neighbors Classifier",
    "adaboost": "AdaBoost Classifier",
}

# distance- and margin-based kinds see standardized features
STANDARDIZED_KINDS = frozenset({"linear_svm", "knn"})


def _check_int(name, value, low):
    if isinstance(value, bool) or not isinstance(value, int) or value < low:
        raise ValueError(f"{name} must be an integer >= {low}, got {value!r}")


def _check_params(kind, p):
    if kind == "gaussian_nb":
        if not (isinstance(p["var_smoothing"], (int, float)) and p["var_smoothing"] > 0):
            raise ValueError("var_smoothing must be > 0")
    elif kind in ("decision_tree", "random_forest"):
        if p["max_depth"] is not None:
            _check_int("max_depth", p["max_depth"], 1)
        _check_int("min_samples_split", p["min_samples_split"], 2)
        if kind == "random_forest":
            _check_int("n_trees", p["n_trees"], 1)
            if p["max_features"] not in ("sqrt", None):
                _check_int("max_features", p["max_features"], 1)
            if not isinstance(p["bootstrap"], bool):
                raise ValueError("bootstrap must be a boolean")
    elif kind == "linear_svm":
        for name in ("lam", "eta0"):
            if not (isinstance(p[name], (int, float)) and p[name] > 0 and math.isfinite(p[name])):
                raise ValueError(f"{name} must be > 0")
        _check_int("epochs", p["epochs"], 1)
    elif kind == "knn":
        _check_int("k", p["k"], 1)
    elif kind == "adaboost":
        _check_int("rounds", p["rounds"], 1)


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DEFAULT_PARAMS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise ValueError(f"unknown {self.kind} parameters: {sorted(unknown)}")
        merged = {**DEFAULT_PARAMS[self.kind], **self.params}
        _check_params(self.kind, merged)
        _check_int("seed", self.seed, 0)
        if self.seed >= 2**64:
            raise ValueError("seed must fit in 64 bits")
        object.__setattr__(self, "params", MappingProxyType(merged))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_dict(cls, d) -> "ModelSpec":
        return cls(d["kind"], dict(d.get("params", {})), int(d.get("seed", 0)))


def default_specs(seed: int = 0) -> list[ModelSpec]:
    return [ModelSpec(kind, seed=seed) for kind in KINDS]


@dataclass(frozen=True, eq=False)
class TrainedModel:
    spec: ModelSpec
    params: Mapping[str, Any]
    feature_length: int
    standardizer: StandardizationParams | None = None

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def model_id(self) -> str:
        digest = hashlib.sha256(serialize_model(self)).hexdigest()
        return f"{self.kind}-{digest[:12]}"


@dataclass(frozen=True)
class Prediction:
    probability: float
    decision: Label


_FIT = {
    "gaussian_nb": nb.fit_gaussian_nb,
    "decision_tree": tree.fit_decision_tree,
    "random_forest": tree.fit_random_forest,
    "linear_svm": svm.fit_linear_svm,
    "knn": knn.fit_knn,
    "adaboost": boost.fit_adaboost,
}


def _labels_to_bits(y) -> np.ndarray:
    out = []
    for v in y:
        if isinstance(v, Label):
            out.append(1 if v is Label.TORNADO else 0)
        elif isinstance(v, str):
            out.append(1 if Label(v) is Label.TORNADO else 0)
        else:
            if v not in (0, 1):
                raise ShapeError(f"labels must be 0/1 or Label values, got {v!r}")
            out.append(int(v))
    return np.array(out, dtype=np.int8)


def fit(spec: ModelSpec, X, y, n_jobs: int = 1) -> TrainedModel:
    """Train a model of ``spec.kind``.

    Deterministic in ``(spec, X, y)``: the same inputs give byte-identical
    serialized models for any ``n_jobs``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-D, got shape {X.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise DegenerateInputError(f"no training data (shape {X.shape})")
    if not np.isfinite(X).all():
        raise DegenerateInputError("X contains non-finite values")
    yb = _labels_to_bits(y)
    if yb.shape[0] != X.shape[0]:
        raise ShapeError(f"{X.shape[0]} rows but {yb.shape[0]} labels")
    n_pos = int(yb.sum())
    if n_pos == 0 or n_pos == len(yb):
        raise SingleClassError("training labels contain a single class")
    standardizer = None
    Xfit = np.ascontiguousarray(X)
    if spec.kind in STANDARDIZED_KINDS:
        standardizer = fit_standardizer(Xfit)
        Xfit = np.ascontiguousarray(apply_standardizer(standardizer, Xfit))
    params = _FIT[spec.kind](spec.params, spec.seed, Xfit, yb, n_jobs=n_jobs)
    return TrainedModel(spec, params, X.shape[1], standardizer)


def predict_proba_batch(m: TrainedModel, X) -> np.ndarray:
    """Tornado probability for every row of ``X``.

    Row ``i`` of the result is bit-identical to ``predict_proba(m, X[i])``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != m.feature_length:
        raise LengthMismatchError(f"model expects {m.feature_length} features, got shape {X.shape}")
    if m.standardizer is not None:
        X = apply_standardizer(m.standardizer, X)
    X = np.ascontiguousarray(X)
    p = m.params
    kind = m.kind
    if kind == "gaussian_nb":
        out = nb.gaussian_nb_proba(p, X)
    elif kind == "decision_tree":
        out = tree.tree_proba(p, X)
    elif kind == "random_forest":
        out = tree.forest_proba(p, X)
    elif kind == "linear_svm":
        out = svm.svm_proba(p, X)
    elif kind == "knn":
        out = knn.knn_proba(p, X, m.spec.params["k"])
    else:
        out = boost.adaboost_proba(p, X)
    return np.clip(out, 0.0, 1.0)


def predict_proba(m: TrainedModel, x) -> float:
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if x.ndim != 1:
        raise LengthMismatchError(f"expected one feature vector, got shape {x.shape}")
    return float(predict_proba_batch(m, x[None, :])[0])


def predict(m: TrainedModel, x, threshold: float = DEFAULT_THRESHOLD) -> Prediction:
    p = predict_proba(m, x)
    return Prediction(p, Label.TORNADO if p >= threshold else Label.NULL_EVENT)


def decide(probabilities, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """1 where the probability reaches the threshold (ties alert)."""
    return (np.asarray(probabilities) >= threshold).astype(np.int8)


# -- serialization -----------------------------------------------------------


def _params_to_json(kind, p) -> dict:
    if kind == "decision_tree":
        return tree.tree_to_json(p)
    if kind == "random_forest":
        return {"trees": [tree.tree_to_json(t) for t in p["trees"]]}
    out = {}
    for k, v in p.items():
        out[k] = v.tolist() if isinstance(v, np.ndarray) else v
    return out


def _params_from_json(kind, doc, d) -> dict:
    if kind == "decision_tree":
        return _check_tree(tree.tree_from_json(doc), d)
    if kind == "random_forest":
        trees = [_check_tree(tree.tree_from_json(t), d) for t in doc["trees"]]
        if not trees:
            raise ValueError("forest has no trees")
        return {"trees": trees}
    if kind == "gaussian_nb":
        p = {
            "prior": np.array(doc["prior"], dtype=np.float64),
            "mean": np.array(doc["mean"], dtype=np.float64).reshape(2, d),
            "var": np.array(doc["var"], dtype=np.float64).reshape(2, d),
        }
        if p["prior"].shape != (2,) or (p["var"] <= 0).any():
            raise ValueError("bad naive Bayes parameters")
        return p
    if kind == "linear_svm":
        w = np.array(doc["w"], dtype=np.float64)
        if w.shape != (d,):
            raise ValueError("weight vector length mismatch")
        return {"w": w, "b": float(doc["b"])}
    if kind == "knn":
        X = np.array(doc["X"], dtype=np.float64)
        y = np.array(doc["y"], dtype=np.int8)
        if X.ndim != 2 or X.shape[1] != d or y.shape != (X.shape[0],):
            raise ValueError("stored training matrix malformed")
        return {"X": X, "y": y}
    p = {
        "feature": np.array(doc["feature"], dtype=np.intp),
        "threshold": np.array(doc["threshold"], dtype=np.float64),
        "polarity": np.array(doc["polarity"], dtype=np.int64),
        "alpha": np.array(doc["alpha"], dtype=np.float64),
        "error": np.array(doc["error"], dtype=np.float64),
    }
    if len({len(v) for v in p.values()}) > 1 or ((p["feature"] < 0) | (p["feature"] >= d)).any():
        raise ValueError("bad stump table")
    return p


def _check_tree(t, d):
    f = t["feature"]
    if ((f != tree.LEAF) & ((f < 0) | (f >= d))).any():
        raise ValueError("tree feature index out of range")
    return t


def serialize_model(m: TrainedModel) -> bytes:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": m.kind,
        "spec": m.spec.to_dict(),
        "params": _params_to_json(m.kind, m.params),
        "standardizer": m.standardizer.to_dict() if m.standardizer is not None else None,
        "feature_length": m.feature_length,
    }
    return json.dumps(doc, separators=(",", ":"), allow_nan=False).encode("utf-8")


def deserialize_model(data: bytes) -> TrainedModel:
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptModelError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CorruptModelError("model file lacks format_version")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise VersionError(f"unsupported model format_version {doc['format_version']!r}")
    try:
        spec = ModelSpec.from_dict(doc["spec"])
        if doc["kind"] != spec.kind:
            raise ValueError("kind does not match spec")
        d = int(doc["feature_length"])
        if d < 1:
            raise ValueError("feature_length must be positive")
        params = _params_from_json(spec.kind, doc["params"], d)
        std = doc["standardizer"]
        standardizer = StandardizationParams.from_dict(std) if std is not None else None
        if standardizer is not None and (len(standardizer) != d or len(standardizer.scale) != d):
            raise ValueError("standardizer length mismatch")
        if (standardizer is None) == (spec.kind in STANDARDIZED_KINDS):
            raise ValueError("standardizer presence does not match model kind")
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModelError(f"malformed model file: {exc}") from exc
    return TrainedModel(spec, params, d, standardizer)


def save_model(m: TrainedModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_model(m))


def load_model(path) -> TrainedModel:
    with open(path, "rb") as fh:
        return deserialize_model(fh.read())
