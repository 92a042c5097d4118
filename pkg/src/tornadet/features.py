"""Quadrant mean/std features.

Each 19x19 layer is cut into four quadrants.  The centre row and column go
to the northern and western quadrants, so the cell counts are
NW 100, NE 90, SW 90, SE 81.  Feature layout is day-major (oldest day
first), then variable in schema order, then quadrant (NW, NE, SW, SE), then
statistic (mean, population std): 56 features per day.

All sums run sequentially in index order (``cumsum``) so a window yields
bit-identical features whether featurized alone or in a batch.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInputError, EmptyQuadrantError, LengthMismatchError, ShapeError
from .schema import GRID_SHAPE, N_VARIABLES, EventWindow, validate_window

SPLIT = 10  # first index of the southern rows / eastern columns
N_QUADRANTS = 4
N_STATS = 2
FEATURES_PER_DAY = N_VARIABLES * N_QUADRANTS * N_STATS
STD_FLOOR = 1e-9


class QuadrantId(enum.IntEnum):
    NW = 0
    NE = 1
    SW = 2
    SE = 3


# Row 0 is the southernmost row, so "north" in the quadrant names refers to
# the first rows of the stored layer.
_QUADRANT_SLICES = {
    QuadrantId.NW: (slice(0, SPLIT), slice(0, SPLIT)),
    QuadrantId.NE: (slice(0, SPLIT), slice(SPLIT, None)),
    QuadrantId.SW: (slice(SPLIT, None), slice(0, SPLIT)),
    QuadrantId.SE: (slice(SPLIT, None), slice(SPLIT, None)),
}


def split_quadrants(layer) -> dict[QuadrantId, np.ndarray]:
    """Flattened cell values of each quadrant, row-major."""
    layer = np.asarray(layer, dtype=np.float64)
    if layer.shape != GRID_SHAPE:
        raise ShapeError(f"layer has shape {layer.shape}, expected {GRID_SHAPE}")
    return {q: layer[rs, cs].ravel() for q, (rs, cs) in _QUADRANT_SLICES.items()}


def _seq_sum(a: np.ndarray, axis: int = -1) -> np.ndarray:
    return np.cumsum(a, axis=axis).take(-1, axis=axis)


def _mean_std(cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # two-pass population statistics along the last axis
    n = cells.shape[-1]
    mean = _seq_sum(cells) / n
    dev = cells - mean[..., None]
    std = np.sqrt(_seq_sum(dev * dev) / n)
    return mean, std


def quadrant_stats(cells) -> tuple[float, float]:
    cells = np.asarray(cells, dtype=np.float64).ravel()
    if cells.size == 0:
        raise EmptyQuadrantError("quadrant holds no cells")
    mean, std = _mean_std(cells)
    return float(mean), float(std)


@dataclass(frozen=True)
class FeatureLayout:
    window_days: int
    n_variables: int = N_VARIABLES
    n_quadrants: int = N_QUADRANTS
    n_stats: int = N_STATS

    @property
    def length(self) -> int:
        return self.window_days * self.n_variables * self.n_quadrants * self.n_stats

    def index(self, day: int, variable: int, quadrant: int, stat: int) -> int:
        return ((day * self.n_variables + variable) * self.n_quadrants + quadrant) * self.n_stats + stat


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    layout: FeatureLayout

    def __len__(self):
        return len(self.values)


def _features_from_stack(stack: np.ndarray) -> np.ndarray:
    """``(..., D, 7, 19, 19)`` grids -> ``(..., D*56)`` features."""
    lead = stack.shape[:-2]
    out = np.empty(lead + (N_QUADRANTS, N_STATS))
    for q, (rs, cs) in _QUADRANT_SLICES.items():
        cells = stack[..., rs, cs].reshape(lead + (-1,))
        mean, std = _mean_std(cells)
        out[..., q, 0] = mean
        out[..., q, 1] = std
    return out.reshape(stack.shape[:-4] + (-1,))


def window_stack(w: EventWindow) -> np.ndarray:
    return np.stack([s.values for s in w.snapshots])


def build_feature_vector(w: EventWindow) -> FeatureVector:
    validate_window(w)
    values = _features_from_stack(window_stack(w))
    values.flags.writeable = False
    return FeatureVector(values, FeatureLayout(w.days))


def feature_matrix(windows: Sequence[EventWindow]) -> np.ndarray:
    """Row ``i`` equals ``build_feature_vector(windows[i]).values`` bit for bit."""
    if not windows:
        return np.empty((0, 0))
    rows = [build_feature_vector(w).values for w in windows]
    lengths = {len(r) for r in rows}
    if len(lengths) > 1:
        raise LengthMismatchError(f"windows have differing feature lengths {sorted(lengths)}")
    return np.vstack(rows)


def window_suffix(X: np.ndarray, days: int) -> np.ndarray:
    """Columns belonging to the ``days`` most recent days."""
    return X[..., X.shape[-1] - days * FEATURES_PER_DAY :]


def feature_names(window_days: int) -> list[str]:
    from .schema import VARIABLE_KEYS

    names = []
    for d in range(window_days):
        lag = window_days - d
        for v in VARIABLE_KEYS:
            for q in QuadrantId:
                for stat in ("mean", "std"):
                    names.append(f"lag{lag}.{v}.{q.name}.{stat}")
    return names


# -- standardization ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StandardizationParams:
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        for a in (self.mean, self.scale):
            a.flags.writeable = False

    def __len__(self):
        return len(self.mean)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, d) -> "StandardizationParams":
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["scale"], dtype=np.float64))


def _as_matrix(X) -> np.ndarray:
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return X.astype(np.float64, copy=False)
    rows = [np.asarray(getattr(x, "values", x), dtype=np.float64) for x in X]
    if not rows:
        raise EmptyInputError("no feature vectors given")
    if len({len(r) for r in rows}) > 1:
        raise LengthMismatchError("feature vectors differ in length")
    return np.vstack(rows)


def fit_standardizer(X, eps: float = STD_FLOOR) -> StandardizationParams:
    X = _as_matrix(X)
    if X.shape[0] == 0:
        raise EmptyInputError("no feature vectors given")
    n = X.shape[0]
    mean = _seq_sum(X, axis=0) / n
    dev = X - mean
    std = np.sqrt(_seq_sum(dev * dev, axis=0) / n)
    return StandardizationParams(mean, np.maximum(std, eps))


def apply_standardizer(p: StandardizationParams, x):
    x = np.asarray(getattr(x, "values", x), dtype=np.float64)
    if x.shape[-1] != len(p):
        raise LengthMismatchError(f"expected {len(p)} features, got {x.shape[-1]}")
    return (x - p.mean) / p.scale


def invert_standardizer(p: StandardizationParams, z):
    z = np.asarray(z, dtype=np.float64)
    if z.shape[-1] != len(p):
        raise LengthMismatchError(f"expected {len(p)} features, got {z.shape[-1]}")
    return z * p.scale + p.mean


# -- export ------------------------------------------------------------------


def feature_csv(windows: Iterable[EventWindow]) -> bytes:
    windows = list(windows)
    X = feature_matrix(windows)
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["event_id", "label"] + [f"f{i}" for i in range(X.shape[1])])
    for w, row in zip(windows, X):
        writer.writerow([w.event_id, w.label.value] + [repr(float(v)) for v in row])
    return buf.getvalue().encode("utf-8")
