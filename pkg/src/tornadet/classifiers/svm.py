"""Linear soft-margin SVM trained by averaged stochastic subgradient descent."""

import numpy as np

from .. import _kernels
from ._common import logistic, seq_sum, tree_rng


def hinge_objective(w, b, X, ypm, lam) -> float:
    margins = ypm * (_kernels.dot_rows(X, w) + b)
    hinge = np.maximum(0.0, 1.0 - margins)
    return float(0.5 * lam * seq_sum(w * w) + seq_sum(hinge) / X.shape[0])


def svm_train(params, seed, X, y, return_history=False):
    """Minimise ``lam/2 |w|^2 + mean hinge`` over a fixed number of epochs.

    Each epoch visits the rows in a seed-determined shuffled order and
    updates a running average of all iterates.  At the end of every epoch
    the averaged iterate is checkpointed if it lowers the full-training
    objective; the last checkpoint is returned, so the objective of the
    returned model never rises from one epoch to the next.

    Returns
    -------
    (w, b) or (w, b, history)
        ``history`` lists ``(w, b, objective)`` of the checkpoint after each
        epoch.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    ypm = np.where(np.asarray(y) == 1, 1.0, -1.0)
    n, d = X.shape
    lam = params["lam"]
    rng = tree_rng(seed, 0)
    w = np.zeros(d)
    w_avg = np.zeros(d)
    b = b_avg = 0.0
    t = 0
    best = None
    history = []
    for _ in range(params["epochs"]):
        order = rng.permutation(n).astype(np.intp)
        b, b_avg, t = _kernels.svm_epoch(X, ypm, order, w, w_avg, b, b_avg, t, lam, params["eta0"])
        obj = hinge_objective(w_avg, b_avg, X, ypm, lam)
        if best is None or obj < best[2]:
            best = (w_avg.copy(), float(b_avg), obj)
        if return_history:
            history.append(best)
    if return_history:
        return best[0].copy(), best[1], history
    return best[0], best[1]


def fit_linear_svm(params, seed, X, y, n_jobs=1) -> dict:
    w, b = svm_train(params, seed, X, y)
    return {"w": w, "b": b}


def svm_margin(params, X) -> np.ndarray:
    return _kernels.dot_rows(np.ascontiguousarray(X), params["w"]) + params["b"]


def svm_proba(params, X) -> np.ndarray:
    return logistic(svm_margin(params, X))
