"""CART trees (Gini) and bagged random forests."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .. import _kernels
from ._common import tree_rng

LEAF = -1


def find_best_split(X, y, features=None, rows=None):
    """Best positive-gain Gini split, or ``None``.

    Candidate thresholds are midpoints between consecutive distinct values.
    Ties go to the lowest feature index, then the lowest threshold.

    Returns
    -------
    (feature, threshold, gini_gain) or None
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int8)
    if rows is None:
        rows = np.arange(X.shape[0], dtype=np.intp)
    if features is None:
        features = np.arange(X.shape[1], dtype=np.intp)
    features = np.sort(np.asarray(features, dtype=np.intp))
    f, thr, gain, found = _kernels.best_split(X, y, np.asarray(rows, dtype=np.intp), features)
    if not found or gain <= 0.0:
        return None
    return f, thr, gain


def bootstrap_sample(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` indices drawn with replacement from ``range(n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.integers(0, n, size=n, dtype=np.intp)


def grow_tree(X, y, rows, *, max_depth=None, min_samples_split=2, max_features=None, rng=None) -> dict:
    """Grow one tree on ``rows`` (a multiset of sample indices).

    A node is split whenever it is impure, large enough, above the depth
    limit and some candidate feature takes two distinct values.  The best
    split is used even when its gain rounds to zero, so an unlimited tree
    fits any consistent training set exactly.  With ``max_features`` set, a
    fresh feature subset is drawn from ``rng`` at every node.

    Nodes are numbered in pre-order (left subtree first).
    """
    d = X.shape[1]
    all_features = np.arange(d, dtype=np.intp)
    feature, threshold, left, right, counts = [], [], [], [], []
    # (rows, depth, parent, is_left)
    stack = [(np.asarray(rows, dtype=np.intp), 0, -1, False)]
    while stack:
        node_rows, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        n_pos = int(y[node_rows].sum())
        n = node_rows.shape[0]
        counts.append((n - n_pos, n_pos))
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        if n_pos == 0 or n_pos == n or n < min_samples_split:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if max_features is None or max_features >= d:
            feats = all_features
        else:
            feats = np.sort(rng.choice(d, size=max_features, replace=False)).astype(np.intp)
        f, thr, _gain, found = _kernels.best_split(X, y, node_rows, feats)
        if not found:
            continue
        goes_left = X[node_rows, f] <= thr
        feature[node] = f
        threshold[node] = thr
        stack.append((node_rows[~goes_left], depth + 1, node, False))
        stack.append((node_rows[goes_left], depth + 1, node, True))
    return {
        "feature": np.array(feature, dtype=np.intp),
        "threshold": np.array(threshold, dtype=np.float64),
        "left": np.array(left, dtype=np.intp),
        "right": np.array(right, dtype=np.intp),
        "count": np.array(counts, dtype=np.int64).reshape(-1, 2),
    }


def apply_tree(tree, X) -> np.ndarray:
    """Leaf index reached by every row of ``X``."""
    feature, threshold = tree["feature"], tree["threshold"]
    left, right = tree["left"], tree["right"]
    node = np.zeros(X.shape[0], dtype=np.intp)
    active = np.flatnonzero(feature[node] != LEAF)
    while active.size:
        cur = node[active]
        go_left = X[active, feature[cur]] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[feature[node[active]] != LEAF]
    return node


def tree_proba(tree, X) -> np.ndarray:
    counts = tree["count"][apply_tree(tree, X)]
    return counts[:, 1] / (counts[:, 0] + counts[:, 1])


def fit_decision_tree(params, seed, X, y, n_jobs=1) -> dict:
    rows = np.arange(X.shape[0], dtype=np.intp)
    return grow_tree(
        X, y, rows, max_depth=params["max_depth"], min_samples_split=params["min_samples_split"]
    )


def resolve_max_features(spec_value, d: int) -> int:
    if spec_value == "sqrt":
        return max(1, math.ceil(math.sqrt(d)))
    if spec_value is None:
        return d
    return min(int(spec_value), d)


def fit_random_forest(params, seed, X, y, n_jobs=1) -> dict:
    n, d = X.shape
    max_features = resolve_max_features(params["max_features"], d)

    def build(index):
        # one independent stream per tree keeps parallel fits identical to serial ones
        rng = tree_rng(seed, index)
        rows = bootstrap_sample(rng, n) if params["bootstrap"] else np.arange(n, dtype=np.intp)
        return grow_tree(
            X,
            y,
            rows,
            max_depth=params["max_depth"],
            min_samples_split=params["min_samples_split"],
            max_features=max_features,
            rng=rng,
        )

    indices = range(params["n_trees"])
    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            trees = list(pool.map(build, indices))
    else:
        trees = [build(i) for i in indices]
    return {"trees": trees}


def forest_proba(params, X) -> np.ndarray:
    trees = params["trees"]
    acc = np.zeros(X.shape[0])
    for tree in trees:
        acc = acc + tree_proba(tree, X)
    return acc / len(trees)


def tree_to_json(tree) -> dict:
    return {
        "feature": tree["feature"].tolist(),
        "threshold": tree["threshold"].tolist(),
        "left": tree["left"].tolist(),
        "right": tree["right"].tolist(),
        "count": tree["count"].tolist(),
    }


def tree_from_json(doc) -> dict:
    tree = {
        "feature": np.array(doc["feature"], dtype=np.intp),
        "threshold": np.array(doc["threshold"], dtype=np.float64),
        "left": np.array(doc["left"], dtype=np.intp),
        "right": np.array(doc["right"], dtype=np.intp),
        "count": np.array(doc["count"], dtype=np.int64).reshape(-1, 2),
    }
    n = len(tree["feature"])
    if not all(len(tree[k]) == n for k in tree):
        raise ValueError("tree arrays differ in length")
    internal = np.flatnonzero(tree["feature"] != LEAF)
    for side in ("left", "right"):
        kids = tree[side][internal]
        # pre-order numbering: children always follow their parent
        if kids.size and ((kids <= internal).any() or kids.max() >= n):
            raise ValueError("tree child index out of range")
    return tree
