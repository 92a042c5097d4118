"""Gaussian naive Bayes with per-class diagonal variances."""

import math

import numpy as np

from ._common import logistic, seq_sum

LOG_2PI = math.log(2.0 * math.pi)


def _col_mean_var(X):
    n = X.shape[0]
    mean = seq_sum(X, axis=0) / n
    dev = X - mean
    return mean, seq_sum(dev * dev, axis=0) / n


def fit_gaussian_nb(params, seed, X, y, n_jobs=1) -> dict:
    _, overall_var = _col_mean_var(X)
    floor = params["var_smoothing"] * float(overall_var.max())
    if floor <= 0.0:
        floor = params["var_smoothing"]
    means, variances, priors = [], [], []
    for cls in (0, 1):
        Xc = X[y == cls]
        mean, var = _col_mean_var(Xc)
        means.append(mean)
        variances.append(np.maximum(var, floor))
        priors.append(Xc.shape[0] / X.shape[0])
    return {
        "prior": np.array(priors),
        "mean": np.vstack(means),
        "var": np.vstack(variances),
    }


def joint_log_likelihood(params, X) -> np.ndarray:
    """``(m, 2)`` log prior plus log density, columns null then tornado."""
    out = np.empty((X.shape[0], 2))
    for cls in (0, 1):
        var = params["var"][cls]
        dev = X - params["mean"][cls]
        terms = -0.5 * (LOG_2PI + np.log(var)) - dev * dev / (2.0 * var)
        out[:, cls] = math.log(params["prior"][cls]) + seq_sum(terms, axis=1)
    return out


def gaussian_nb_proba(params, X) -> np.ndarray:
    jll = joint_log_likelihood(params, X)
    return logistic(jll[:, 1] - jll[:, 0])
