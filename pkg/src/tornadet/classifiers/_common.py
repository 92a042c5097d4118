import numpy as np

from .._rng import derived_rng


def seq_sum(a, axis=-1):
    """Sum along ``axis`` in strict index order."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape[axis] == 0:
        return np.zeros(np.delete(a.shape, axis))
    return np.cumsum(a, axis=axis).take(-1, axis=axis)


def logistic(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def tree_rng(seed, stream):
    return derived_rng(seed, stream)
