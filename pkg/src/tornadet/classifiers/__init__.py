"""Six from-scratch binary classifiers behind one fit/predict interface."""

from .boost import PresortedData, Stump, adaboost_round
from .model import (
    DEFAULT_PARAMS,
    DEFAULT_THRESHOLD,
    DISPLAY_NAMES,
    KINDS,
    ModelSpec,
    Prediction,
    TrainedModel,
    decide,
    default_specs,
    deserialize_model,
    fit,
    load_model,
    predict,
    predict_proba,
    predict_proba_batch,
    save_model,
    serialize_model,
)
from .svm import svm_train
from .tree import bootstrap_sample, find_best_split

__all__ = [
    "DEFAULT_PARAMS",
    "DEFAULT_THRESHOLD",
    "DISPLAY_NAMES",
    "KINDS",
    "ModelSpec",
    "Prediction",
    "PresortedData",
    "Stump",
    "TrainedModel",
    "adaboost_round",
    "bootstrap_sample",
    "decide",
    "default_specs",
    "deserialize_model",
    "find_best_split",
    "fit",
    "load_model",
    "predict",
    "predict_proba",
    "predict_proba_batch",
    "save_model",
    "serialize_model",
    "svm_train",
]
