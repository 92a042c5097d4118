"""Numpy reference kernels.

Every function here has a compiled twin in ``_ckernels.pyx`` with the same
signature.  Both perform the same floating-point operations in the same
order (sequential accumulation, no fused multiply-add), so their results
are bit-identical.
"""

import numpy as np


def _gini(n, p):
    a = p / n
    b = (n - p) / n
    return 1.0 - a * a - b * b


def best_split(X, y, rows, features):
    """Best Gini split of ``rows`` over ``features``.

    Parameters
    ----------
    X : (n, d) float64 array
    y : (n,) int8 array of 0/1 labels
    rows : (m,) intp array, sample indices of the node (duplicates allowed)
    features : (k,) intp array, candidate features in ascending order

    Returns
    -------
    (feature, threshold, gain, found)
        ``found`` is False when no candidate feature takes two distinct
        values.  Otherwise the split maximises ``gain``; ties go to the
        earliest feature and then the lowest threshold.  ``gain`` may be
        zero or a rounding-level negative.
    """
    m = rows.shape[0]
    yr = y[rows]
    total_pos = int(yr.sum())
    parent = _gini(float(m), float(total_pos))
    best = (-1, 0.0, -np.inf, False)
    for f in features:
        vals = X[rows, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        valid = sv[:-1] < sv[1:]
        if not valid.any():
            continue
        pos = np.cumsum(yr[order].astype(np.int64))[:-1]
        nl = np.arange(1, m, dtype=np.int64)
        nr = m - nl
        pl = pos
        pr = total_pos - pl
        gl = _gini(nl.astype(np.float64), pl.astype(np.float64))
        gr = _gini(nr.astype(np.float64), pr.astype(np.float64))
        gain = parent - (nl / m) * gl - (nr / m) * gr
        gain = np.where(valid, gain, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best[2]:
            thr = (sv[i] + sv[i + 1]) / 2.0
            if thr >= sv[i + 1]:
                thr = sv[i]
            best = (int(f), float(thr), float(gain[i]), True)
    return best


def best_stump(Xs, order, w, ypos):
    """Weighted-error-minimising decision stump.

    Parameters
    ----------
    Xs : (d, n) float64, each row the sorted values of one feature
    order : (d, n) intp, argsort of each feature column
    w : (n,) float64 sample weights
    ypos : (n,) int8, 1 for positive class

    Returns
    -------
    (feature, threshold, polarity, error) with polarity +1 meaning
    "predict positive when x > threshold".  ``feature`` is -1 when every
    feature is constant.
    """
    d, n = Xs.shape
    wpos = np.where(ypos == 1, w, 0.0)
    wneg = np.where(ypos == 1, 0.0, w)
    tot_pos = np.cumsum(wpos)[-1]
    tot_neg = np.cumsum(wneg)[-1]
    lpos = np.cumsum(wpos[order], axis=1)[:, :-1]
    lneg = np.cumsum(wneg[order], axis=1)[:, :-1]
    err = np.empty((d, n - 1, 2))
    err[:, :, 0] = lpos + (tot_neg - lneg)
    err[:, :, 1] = lneg + (tot_pos - lpos)
    valid = Xs[:, :-1] < Xs[:, 1:]
    err[~valid] = np.inf
    flat = int(np.argmin(err))
    f, i, s = np.unravel_index(flat, err.shape)
    if not np.isfinite(err[f, i, s]):
        return -1, 0.0, 1, 0.5
    lo, hi = Xs[f, i], Xs[f, i + 1]
    thr = (lo + hi) / 2.0
    if thr >= hi:
        thr = lo
    return int(f), float(thr), 1 if s == 0 else -1, float(err[f, i, s])


def sq_distances(A, B):
    """Squared Euclidean distances, ``(m, n)``, accumulated over dims in order."""
    m, d = A.shape
    out = np.zeros((m, B.shape[0]))
    for k in range(d):
        diff = A[:, k, None] - B[None, :, k]
        out += diff * diff
    return out


def dot_rows(X, w):
    """``X @ w`` with each row summed sequentially."""
    if X.shape[1] == 0:
        return np.zeros(X.shape[0])
    return np.cumsum(X * w, axis=1)[:, -1]


def svm_epoch(X, ypm, order, w, w_avg, b, b_avg, t, lam, eta0):
    """One SGD pass of the L2-regularised hinge loss with Polyak averaging.

    ``w`` and ``w_avg`` are updated in place.  Step ``t`` (1-based, global
    across epochs) uses rate ``eta0 / (1 + lam * eta0 * t)``.  Returns
    ``(b, b_avg, t)``.
    """
    for i in order:
        t += 1
        eta = eta0 / (1.0 + lam * eta0 * t)
        x = X[i]
        yi = ypm[i]
        margin = yi * (np.cumsum(w * x)[-1] + b)
        w *= 1.0 - eta * lam
        if margin < 1.0:
            ey = eta * yi
            w += ey * x
            b = b + ey
        inv = 1.0 / t
        w_avg += (w - w_avg) * inv
        b_avg = b_avg + (b - b_avg) * inv
    return b, b_avg, t
