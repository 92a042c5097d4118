"""Seeded synthetic weather windows with a known Bayes-optimal decision rule.

Generative model, per window, lag ``L`` (1 = the day before the target) and
variable ``v`` with base level ``b_v`` and scale ``s_v``::

    x = b_v + sign_v * c * separation * s_v * lag_weight(L)
          + s_v * (anomaly_scale * a + z)

``c`` is +1/2 for tornado windows and -1/2 for null windows and applies only
to the signal variables (temperature, wind_u, wind_v, column_rain_water).
``a ~ N(0, 1)`` is one grid-wide anomaly per layer and ``z`` is white noise
smoothed by a 3x3 moving average with wrap-around boundaries, rescaled to
unit variance per cell.  Values are then clipped into the variable's range
and rounded.

Under this model the per-layer covariance is
``s_v**2 * (anomaly_scale**2 * 11' + S)`` with ``S 1 = 9 * 1``, so the
log-likelihood ratio depends on each layer only through its cell sum.  The
oracle ignores clipping and rounding.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._rng import derived_rng
from .ingestion import (
    CatalogEntry,
    Dataset,
    region_id_for_origin,
    serialize_event_catalog,
    write_dataset,
    write_snapshot,
)
from .schema import (
    GRID_SIZE,
    MAX_WINDOW_DAYS,
    SCHEMA,
    VARIABLE_KEYS,
    EventWindow,
    GridSnapshot,
    Label,
)

N_CELLS = GRID_SIZE * GRID_SIZE
SMOOTH_EIGEN = 9.0  # row sum of the smoothed-noise covariance
DEFAULT_REGIONS = tuple((lat, lon) for lat in (30.0, 35.0, 40.0, 45.0) for lon in (-105.0, -100.0, -95.0, -90.0, -85.0))

# key: (base, scale, signal sign, rounding decimals)
_VARIABLE_MODEL = {
    "temperature": (295.0, 3.0, 1, 2),
    "wind_u": (2.0, 4.0, 1, 2),
    "wind_v": (1.0, 4.0, -1, 2),
    "precipitation": (0.004, 0.0015, 0, 6),
    "column_rain_water": (1.5, 0.25, 1, 3),
    "large_scale_rain_rate": (8e-5, 3e-5, 0, 8),
    "cloud_cover": (0.55, 0.15, 0, 3),
}


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    n_tornado: int = 500
    n_null: int = 500
    separation: float = 3.0
    window_days: int = MAX_WINDOW_DAYS
    start_date: dt.date = dt.date(1990, 1, 1)
    regions: tuple[tuple[float, float], ...] = DEFAULT_REGIONS

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.n_tornado < 0 or self.n_null < 0 or self.n_tornado + self.n_null < 1:
            raise ValueError("need n_tornado, n_null >= 0 with at least one window")
        if not (math.isfinite(self.separation) and self.separation >= 0):
            raise ValueError("separation must be a finite value >= 0")
        if not 1 <= self.window_days <= MAX_WINDOW_DAYS:
            raise ValueError(f"window_days must be in 1..{MAX_WINDOW_DAYS}")
        if not self.regions:
            raise ValueError("need at least one region")
        object.__setattr__(self, "regions", tuple((float(a), float(b)) for a, b in self.regions))


@dataclass(frozen=True)
class SynthOracle:
    separation: float
    window_days: int
    prior_tornado: float
    base: tuple[float, ...]
    scale: tuple[float, ...]
    sign: tuple[int, ...]
    anomaly_scale: float = 1.0
    smooth_eigen: float = SMOOTH_EIGEN

    def lag_weight(self, lag: int) -> float:
        return 1.0 / math.sqrt(lag)

    def mahalanobis(self, window_days: int | None = None) -> float:
        """Distance between the class means for the ``window_days`` most recent days."""
        days = self.window_days if window_days is None else window_days
        per_layer = N_CELLS / (self.smooth_eigen + self.anomaly_scale**2 * N_CELLS)
        n_signal = sum(1 for s in self.sign if s)
        total = sum(self.lag_weight(lag) ** 2 for lag in range(1, days + 1))
        return self.separation * math.sqrt(per_layer * n_signal * total)

    def bayes_error(self, window_days: int | None = None) -> float:
        """Exact error rate of :func:`oracle_decide` under the unclipped model."""
        delta = self.mahalanobis(window_days)
        p = self.prior_tornado
        if delta == 0.0 or p in (0.0, 1.0):
            return min(p, 1.0 - p)
        log_ratio = math.log(p / (1.0 - p))
        miss = _norm_cdf((-log_ratio - delta**2 / 2) / delta)
        false_alarm = 1.0 - _norm_cdf((-log_ratio + delta**2 / 2) / delta)
        return p * miss + (1.0 - p) * false_alarm

    def to_dict(self) -> dict:
        return {
            "separation": self.separation,
            "window_days": self.window_days,
            "prior_tornado": self.prior_tornado,
            "variables": list(VARIABLE_KEYS),
            "base": list(self.base),
            "scale": list(self.scale),
            "sign": list(self.sign),
            "anomaly_scale": self.anomaly_scale,
            "smooth_eigen": self.smooth_eigen,
            "lag_weight": "1/sqrt(lag)",
        }


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class SynthResult:
    dataset: Dataset
    oracle: SynthOracle
    catalog: tuple[CatalogEntry, ...] = field(default=())


def _label_sequence(n_tornado: int, n_null: int) -> list[Label]:
    # T N N T repeated; leftovers of the larger class go at the end
    pattern = (Label.TORNADO, Label.NULL_EVENT, Label.NULL_EVENT, Label.TORNADO)
    left = {Label.TORNADO: n_tornado, Label.NULL_EVENT: n_null}
    out = []
    i = 0
    while left[Label.TORNADO] and left[Label.NULL_EVENT]:
        lab = pattern[i % 4]
        out.append(lab)
        left[lab] -= 1
        i += 1
    for lab, n in left.items():
        out.extend([lab] * n)
    return out


def _schedule(spec: SynthSpec) -> list[tuple[Label, int, dt.date]]:
    """``(label, region index, target date)`` per event.

    Events go to regions in contiguous blocks.  Within a region consecutive
    events are 10 days apart when the label changes and 9 days apart when
    it does not, so every null event sits exactly 10 days from its nearest
    same-region tornado and same-class neighbours sit 9 days apart.
    """
    labels = _label_sequence(spec.n_tornado, spec.n_null)
    n_regions = len(spec.regions)
    per_region = -(-len(labels) // n_regions)
    out = []
    for r in range(n_regions):
        block = labels[r * per_region : (r + 1) * per_region]
        date = spec.start_date + dt.timedelta(days=spec.window_days)
        prev = None
        for lab in block:
            if prev is not None:
                date += dt.timedelta(days=10 if lab is not prev else 9)
            out.append((lab, r, date))
            prev = lab
    return out


def _smoothed_noise(rng: np.random.Generator, shape) -> np.ndarray:
    white = rng.standard_normal(shape)
    acc = np.zeros(shape)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            acc = acc + np.roll(white, (dr, dc), axis=(-2, -1))
    return acc / 3.0


def make_oracle(spec: SynthSpec) -> SynthOracle:
    model = [_VARIABLE_MODEL[k] for k in VARIABLE_KEYS]
    total = spec.n_tornado + spec.n_null
    return SynthOracle(
        separation=float(spec.separation),
        window_days=spec.window_days,
        prior_tornado=spec.n_tornado / total,
        base=tuple(m[0] for m in model),
        scale=tuple(m[1] for m in model),
        sign=tuple(m[2] for m in model),
    )


def _window_values(spec: SynthSpec, oracle: SynthOracle, index: int, label: Label) -> np.ndarray:
    """``(D, 7, 19, 19)`` unclipped field values for one window, oldest day first."""
    rng = derived_rng(spec.seed, 1, index)
    d = spec.window_days
    shape = (d, len(SCHEMA), GRID_SIZE, GRID_SIZE)
    anomaly = rng.standard_normal((d, len(SCHEMA)))
    noise = _smoothed_noise(rng, shape)
    base = np.array(oracle.base)[None, :, None, None]
    scale = np.array(oracle.scale)[None, :, None, None]
    sign = np.array(oracle.sign, dtype=np.float64)
    c = 0.5 if label is Label.TORNADO else -0.5
    lags = np.arange(d, 0, -1)
    weights = np.array([oracle.lag_weight(int(L)) for L in lags])
    offset = c * spec.separation * weights[:, None] * sign[None, :]
    return base + scale * (offset[:, :, None, None] + oracle.anomaly_scale * anomaly[:, :, None, None] + noise)


def _finalize(values: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    for i, var in enumerate(SCHEMA):
        layer = values[:, i]
        lo = -np.inf if var.signed else var.low
        layer = np.clip(layer, lo, var.high)
        out[:, i] = np.round(layer, _VARIABLE_MODEL[var.key][3])
    # rounding never leaves the range, but -0.0 would survive a JSON round trip as 0
    out += 0.0
    return out


def generate(spec: SynthSpec) -> SynthResult:
    oracle = make_oracle(spec)
    windows = []
    catalog = []
    for k, (label, r, target) in enumerate(_schedule(spec)):
        lat0, lon0 = spec.regions[r]
        region_id = region_id_for_origin(lat0, lon0)
        values = _finalize(_window_values(spec, oracle, k, label))
        snaps = tuple(
            GridSnapshot.from_array(region_id, target - dt.timedelta(days=spec.window_days - j), lat0, lon0, values[j])
            for j in range(spec.window_days)
        )
        event_id = f"S{spec.seed}-{k:05d}"
        windows.append(EventWindow(event_id, label, target, snaps))
        loc_rng = derived_rng(spec.seed, 2, k)
        lat, lon = np.round(loc_rng.uniform(0.5, 4.5, size=2), 4)
        catalog.append(CatalogEntry(event_id, target, float(lat0 + lat), float(lon0 + lon), label))
    provenance = {
        "source": "synthetic",
        "seed": spec.seed,
        "separation": spec.separation,
        "n_tornado": spec.n_tornado,
        "n_null": spec.n_null,
        "start_date": spec.start_date.isoformat(),
    }
    return SynthResult(Dataset(tuple(windows), SCHEMA, provenance), oracle, tuple(catalog))


def generate_dataset(spec: SynthSpec) -> tuple[Dataset, SynthOracle]:
    result = generate(spec)
    return result.dataset, result.oracle


def oracle_score(o: SynthOracle, w: EventWindow) -> float:
    """Posterior log-odds of tornado under the generative model."""
    coef = 1.0 / (o.smooth_eigen + o.anomaly_scale**2 * N_CELLS)
    score = 0.0
    for j, snap in enumerate(w.snapshots):
        lag = w.days - j
        weight = o.lag_weight(lag)
        values = snap.values
        for v, sgn in enumerate(o.sign):
            if not sgn:
                continue
            dev = float(np.cumsum((values[v] - o.base[v]).ravel())[-1])
            score += sgn * o.separation * weight / o.scale[v] * coef * dev
    p = o.prior_tornado
    if p in (0.0, 1.0):
        return math.inf if p == 1.0 else -math.inf
    return score + math.log(p / (1.0 - p))


def oracle_decide(o: SynthOracle, w: EventWindow) -> Label:
    """Bayes decision; a log-odds of exactly zero resolves to null_event."""
    return Label.TORNADO if oracle_score(o, w) > 0.0 else Label.NULL_EVENT


def write_synthetic(result: SynthResult, out_dir) -> dict:
    """Write ``catalog.csv``, ``snapshots/``, ``dataset.json`` and ``oracle.json``."""
    out = Path(out_dir)
    snap_dir = out / "snapshots"
    snap_dir.mkdir(parents=True, exist_ok=True)
    for w in result.dataset.windows:
        for s in w.snapshots:
            write_snapshot(s, snap_dir)
    (out / "catalog.csv").write_bytes(serialize_event_catalog(result.catalog))
    write_dataset(result.dataset, out / "dataset.json")
    (out / "oracle.json").write_text(json.dumps(result.oracle.to_dict(), indent=2) + "\n")
    return {
        "catalog": out / "catalog.csv",
        "snapshots": snap_dir,
        "dataset": out / "dataset.json",
        "oracle": out / "oracle.json",
    }
