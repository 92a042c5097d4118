"""Domain types for daily weather grids and labelled event windows.

A :class:`GridSnapshot` is one region-day: seven 19x19 layers on a regular
lat/lon grid whose row 0 is the southernmost row and column 0 the
westernmost column.  An :class:`EventWindow` strings ``D`` consecutive
snapshots (oldest first) ending the day before the date being predicted.
"""

from __future__ import annotations

import datetime as dt
import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    MissingVariableError,
    NonFiniteError,
    RangeError,
    ShapeError,
    WindowError,
)

GRID_SIZE = 19
GRID_SHAPE = (GRID_SIZE, GRID_SIZE)
DEFAULT_RESOLUTION = 0.25
MAX_WINDOW_DAYS = 5


class Label(str, enum.Enum):
    TORNADO = "tornado"
    NULL_EVENT = "null_event"

    @property
    def positive(self) -> bool:
        return self is Label.TORNADO

    @classmethod
    def from_bit(cls, bit) -> "Label":
        return cls.TORNADO if bit else cls.NULL_EVENT


@dataclass(frozen=True)
class Variable:
    key: str
    unit: str
    low: float
    high: float
    # wind components are signed; their lower bound is not enforced
    signed: bool = False

    def contains(self, value: float) -> bool:
        if value > self.high:
            return False
        return self.signed or value >= self.low


@dataclass(frozen=True)
class VariableSchema:
    variables: tuple[Variable, ...]

    def __post_init__(self):
        if len(self.variables) != 7:
            raise ValueError("schema must hold exactly 7 variables")

    @property
    def keys(self) -> tuple[str, ...]:
        return tuple(v.key for v in self.variables)

    def index(self, key: str) -> int:
        return self.keys.index(key)

    def __iter__(self):
        return iter(self.variables)

    def __len__(self):
        return len(self.variables)


SCHEMA = VariableSchema(
    (
        Variable("temperature", "K", 0.0, math.inf),
        Variable("wind_u", "m s-1", 0.0, math.inf, signed=True),
        Variable("wind_v", "m s-1", 0.0, math.inf, signed=True),
        Variable("precipitation", "m", 0.0, math.inf),
        Variable("column_rain_water", "kg m-2", 0.0, math.inf),
        Variable("large_scale_rain_rate", "kg m-2 s-1", 0.0, math.inf),
        Variable("cloud_cover", "1", 0.0, 1.0),
    )
)
VARIABLE_KEYS = SCHEMA.keys
N_VARIABLES = len(SCHEMA)


@dataclass(frozen=True, eq=False)
class GridSnapshot:
    """One region-day of gridded fields.

    ``layers`` maps variable key to a 2-D array.  Construction does not
    validate; call :func:`validate_snapshot` for that.
    """

    region_id: str
    date: dt.date
    lat0: float
    lon0: float
    resolution: float
    layers: Mapping[str, np.ndarray]
    _stack: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        frozen = {}
        for key, layer in self.layers.items():
            arr = np.array(layer, dtype=np.float64)
            arr.flags.writeable = False
            frozen[key] = arr
        object.__setattr__(self, "layers", frozen)

    @classmethod
    def from_array(cls, region_id, date, lat0, lon0, values, resolution=DEFAULT_RESOLUTION):
        """Build from a ``(7, 19, 19)`` array laid out in schema order."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 3 or values.shape[0] != N_VARIABLES:
            raise ShapeError(f"expected ({N_VARIABLES}, 19, 19) array, got {values.shape}")
        layers = {key: values[i] for i, key in enumerate(VARIABLE_KEYS)}
        return cls(region_id, date, float(lat0), float(lon0), float(resolution), layers)

    @property
    def values(self) -> np.ndarray:
        """Layers stacked in schema order, shape ``(7, 19, 19)``."""
        if self._stack is None:
            stack = np.stack([self.layers[k] for k in VARIABLE_KEYS])
            stack.flags.writeable = False
            object.__setattr__(self, "_stack", stack)
        return self._stack

    def same_grid(self, other: "GridSnapshot") -> bool:
        return (
            self.region_id == other.region_id
            and self.lat0 == other.lat0
            and self.lon0 == other.lon0
            and self.resolution == other.resolution
        )

    def __eq__(self, other):
        if not isinstance(other, GridSnapshot):
            return NotImplemented
        if not (self.same_grid(other) and self.date == other.date):
            return False
        if self.layers.keys() != other.layers.keys():
            return False
        return all(
            self.layers[k].shape == other.layers[k].shape
            and np.array_equal(self.layers[k], other.layers[k])
            for k in self.layers
        )

    __hash__ = None


def validate_snapshot(s: GridSnapshot) -> GridSnapshot:
    """Check every snapshot invariant and return ``s`` unchanged.

    Checks run in a fixed order (resolution, presence, shape, finiteness,
    range), variables in schema order and cells row-major, so the first
    violation reported is always the same for the same input.
    """
    if not (math.isfinite(s.resolution) and s.resolution > 0):
        raise RangeError(
            f"resolution must be > 0, got {s.resolution!r}",
            variable="resolution",
            value=s.resolution,
        )
    for key in VARIABLE_KEYS:
        if key not in s.layers:
            raise MissingVariableError(f"missing variable {key!r}", variable=key)
    for key in VARIABLE_KEYS:
        shape = s.layers[key].shape
        if shape != GRID_SHAPE:
            raise ShapeError(f"layer {key!r} has shape {shape}, expected {GRID_SHAPE}")
    for var in SCHEMA:
        layer = s.layers[var.key]
        bad = ~np.isfinite(layer)
        if bad.any():
            cell = _first_cell(bad)
            raise NonFiniteError(
                f"non-finite value in {var.key!r} at cell {cell}",
                variable=var.key,
                cell=cell,
            )
        out = layer > var.high
        if not var.signed:
            out |= layer < var.low
        if out.any():
            cell = _first_cell(out)
            value = float(layer[cell])
            raise RangeError(
                f"{var.key} value {value!r} at cell {cell} outside [{var.low}, {var.high}]",
                variable=var.key,
                cell=cell,
                value=value,
            )
    return s


def _first_cell(mask: np.ndarray) -> tuple[int, int]:
    r, c = np.unravel_index(int(np.argmax(mask)), mask.shape)
    return int(r), int(c)


@dataclass(frozen=True)
class EventWindow:
    event_id: str
    label: Label
    target_date: dt.date
    snapshots: tuple[GridSnapshot, ...]

    def __post_init__(self):
        object.__setattr__(self, "snapshots", tuple(self.snapshots))
        object.__setattr__(self, "label", Label(self.label))

    @property
    def days(self) -> int:
        return len(self.snapshots)

    @property
    def region_id(self) -> str:
        return self.snapshots[0].region_id


def validate_window(w: EventWindow) -> EventWindow:
    d = len(w.snapshots)
    if not 1 <= d <= MAX_WINDOW_DAYS:
        raise WindowError(f"window {w.event_id!r} holds {d} snapshots, expected 1..{MAX_WINDOW_DAYS}")
    first = w.snapshots[0]
    for lag, snap in zip(range(d, 0, -1), w.snapshots):
        expected = w.target_date - dt.timedelta(days=lag)
        if snap.date != expected:
            raise WindowError(
                f"window {w.event_id!r}: snapshot dated {snap.date}, expected {expected}"
            )
        if not snap.same_grid(first):
            raise WindowError(f"window {w.event_id!r}: snapshots do not share one grid")
    return w


def window_from_snapshots(event_id, label, snapshots: Sequence[GridSnapshot]) -> EventWindow:
    """Window whose target date is the day after the newest snapshot."""
    target = snapshots[-1].date + dt.timedelta(days=1)
    return validate_window(EventWindow(event_id, Label(label), target, tuple(snapshots)))
