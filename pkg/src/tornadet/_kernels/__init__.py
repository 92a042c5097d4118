"""Hot numeric kernels, compiled when available.

The Cython extension ``_ckernels`` is used if it imports; otherwise the numpy
module ``_pykernels`` is used.  Set ``TORNADET_KERNELS=python`` to force the
fallback.  Both backends return bit-identical results.
"""

import contextlib
import os

from . import _pykernels

if os.environ.get("TORNADET_KERNELS", "").lower() == "python":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

best_split = _impl.best_split
best_stump = _impl.best_stump
sq_distances = _impl.sq_distances
dot_rows = _impl.dot_rows
svm_epoch = _impl.svm_epoch


def available_backends():
    """Map of backend name to kernel module for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out


_NAMES = ("best_split", "best_stump", "sq_distances", "dot_rows", "svm_epoch")


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily route every kernel call through backend ``name``.

    Not thread-safe; meant for tests and benchmarks.
    """
    global BACKEND
    module = available_backends()[name]
    saved = {k: globals()[k] for k in _NAMES}
    saved_backend = BACKEND
    try:
        for k in _NAMES:
            globals()[k] = getattr(module, k)
        BACKEND = name
        yield module
    finally:
        globals().update(saved)
        BACKEND = saved_backend
