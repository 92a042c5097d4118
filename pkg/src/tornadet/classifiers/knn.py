"""k-nearest neighbours in standardized feature space."""

import numpy as np

from .. import _kernels


def fit_knn(params, seed, X, y, n_jobs=1) -> dict:
    return {"X": np.array(X, dtype=np.float64), "y": np.array(y, dtype=np.int8)}


def neighbours(params, k, Xq) -> np.ndarray:
    """Indices of the ``k`` nearest stored rows; distance ties go to the lower index."""
    dist = _kernels.sq_distances(np.ascontiguousarray(Xq), np.ascontiguousarray(params["X"]))
    k = min(k, params["X"].shape[0])
    return np.argsort(dist, axis=1, kind="stable")[:, :k]


def knn_proba(params, X, k) -> np.ndarray:
    idx = neighbours(params, k, X)
    return params["y"][idx].sum(axis=1) / idx.shape[1]
