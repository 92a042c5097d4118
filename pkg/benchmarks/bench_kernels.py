"""Time the compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--rows 1000] [--days 5] [--repeat 3]

Each kernel and each full model fit runs under both backends on the same
synthetic features; the fitted models are also checked for byte equality.
"""

import argparse
import time

import numpy as np

from tornadet import _kernels
from tornadet.classifiers import ModelSpec, fit, serialize_model
from tornadet.classifiers.boost import PresortedData
from tornadet.features import FEATURES_PER_DAY


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=1000)
    ap.add_argument("--days", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    d = args.days * FEATURES_PER_DAY
    y = (rng.random(args.rows) < 0.5).astype(np.int8)
    X = rng.standard_normal((args.rows, d)) + 0.3 * y[:, None]
    rows = np.arange(args.rows, dtype=np.intp)
    feats = np.arange(d, dtype=np.intp)
    pre = PresortedData(X, y)
    w = np.full(args.rows, 1.0 / args.rows)
    ypm = np.where(y == 1, 1.0, -1.0)
    Q = np.ascontiguousarray(X[:100])

    kernels = {
        "best_split (all features)": lambda k: k.best_split(X, y, rows, feats),
        "best_stump (all features)": lambda k: k.best_stump(pre.sorted, pre.order, w, pre.ypos),
        "sq_distances (100 queries)": lambda k: k.sq_distances(Q, X),
        "svm_epoch (one pass)": lambda k: k.svm_epoch(X, ypm, rows, np.zeros(d), np.zeros(d), 0.0, 0.0, 0, 1e-4, 0.1),
    }
    models = ["decision_tree", "random_forest", "adaboost", "linear_svm", "knn", "gaussian_nb"]
    backends = _kernels.available_backends()
    names = [n for n in ("cython", "python") if n in backends]
    print(f"rows={args.rows} features={d} backends={','.join(names)} (best of {args.repeat})")
    print(f"{'task':<30}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))

    def report(label, secs):
        line = f"{label:<30}" + "".join(f"{secs[n]:>11.4f}s" for n in names)
        if len(names) == 2:
            line += f"{secs['python'] / secs['cython']:>11.1f}x"
        print(line)

    for label, call in kernels.items():
        report(label, {n: best_of(lambda: call(backends[n]), args.repeat) for n in names})

    for kind in models:
        spec = ModelSpec(kind, seed=args.seed)
        secs, blobs = {}, {}
        for n in names:
            with _kernels.use_backend(n):
                secs[n] = best_of(lambda: fit(spec, X, y), 1 if kind == "random_forest" else args.repeat)
                blobs[n] = serialize_model(fit(spec, X, y))
        report(f"fit {kind}", secs)
        if len(names) == 2 and blobs["cython"] != blobs["python"]:
            raise SystemExit(f"backends disagree on {kind}")


if __name__ == "__main__":
    main()
