"""Discrete AdaBoost over depth-1 decision stumps."""

import math
from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ._common import logistic, seq_sum

EPS_CLAMP = 1e-10


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float
    polarity: int  # +1: positive when x > threshold

    def predict(self, X) -> np.ndarray:
        """Predictions in {-1, +1}."""
        s = float(self.polarity)
        return np.where(X[:, self.feature] > self.threshold, s, -s)


class PresortedData:
    """Per-feature sort order, computed once per fit."""

    def __init__(self, X, y):
        self.X = np.ascontiguousarray(X, dtype=np.float64)
        self.ypos = np.ascontiguousarray(y, dtype=np.int8)
        self.ypm = np.where(self.ypos == 1, 1.0, -1.0)
        self.order = np.ascontiguousarray(np.argsort(self.X, axis=0, kind="stable").T).astype(np.intp)
        self.sorted = np.ascontiguousarray(np.take_along_axis(self.X.T, self.order, axis=1))


def adaboost_round(weights, data: PresortedData):
    """One boosting round.

    Returns ``(stump, alpha, new_weights, error)`` or ``None`` when no stump
    beats chance (weighted error >= 0.5) or every feature is constant.  The
    error is clamped to ``[1e-10, 0.5 - 1e-10]`` before computing alpha.
    """
    f, thr, s, err = _kernels.best_stump(data.sorted, data.order, weights, data.ypos)
    if f < 0 or err >= 0.5:
        return None
    stump = Stump(f, thr, s)
    eps = min(max(err, EPS_CLAMP), 0.5 - EPS_CLAMP)
    alpha = 0.5 * math.log((1.0 - eps) / eps)
    w = weights * np.exp(-alpha * data.ypm * stump.predict(data.X))
    return stump, alpha, w / seq_sum(w), err


def fit_adaboost(params, seed, X, y, n_jobs=1) -> dict:
    data = PresortedData(X, y)
    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    stumps, alphas, errors = [], [], []
    for _ in range(params["rounds"]):
        step = adaboost_round(w, data)
        if step is None:
            break
        stump, alpha, w, err = step
        stumps.append(stump)
        alphas.append(alpha)
        errors.append(err)
        if err <= EPS_CLAMP:
            # the ensemble already fits the training set; further rounds repeat this stump
            break
    return {
        "feature": np.array([s.feature for s in stumps], dtype=np.intp),
        "threshold": np.array([s.threshold for s in stumps], dtype=np.float64),
        "polarity": np.array([s.polarity for s in stumps], dtype=np.int64),
        "alpha": np.array(alphas, dtype=np.float64),
        "error": np.array(errors, dtype=np.float64),
    }


def ensemble_margin(params, X) -> np.ndarray:
    margin = np.zeros(X.shape[0])
    for f, thr, s, a in zip(params["feature"], params["threshold"], params["polarity"], params["alpha"]):
        h = np.where(X[:, f] > thr, float(s), -float(s))
        margin = margin + a * h
    return margin


def adaboost_proba(params, X) -> np.ndarray:
    return logistic(ensemble_margin(params, X))
