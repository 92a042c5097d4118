"""Snapshot files, event catalogs and dataset assembly.

File formats
------------
Snapshot file
    One UTF-8 JSON document per region-day::

        {"format_version": 1, "region_id": "N35W100", "date": "2017-05-01",
         "lat0": 35.0, "lon0": -100.0, "resolution": 0.25, "shape": [19, 19],
         "variables": {"temperature": [[...19 numbers...], ...19 rows], ...}}

    Row 0 is the southernmost row, column 0 the westernmost column.  Wind
    components are signed; every other variable must lie in its declared
    range.
Event catalog
    UTF-8 CSV with LF line endings and the exact header
    ``event_id,date,lat,lon,label``.
Dataset file
    One JSON document ``{"format_version": 1, "window_days": D,
    "schema": [...], "provenance": {...}, "windows": [...]}`` where each
    window inlines its snapshot documents, oldest first.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DocumentSyntaxError,
    DuplicateIdError,
    EmptyDatasetError,
    RangeError,
    ShapeError,
    TornadetError,
    WindowError,
)
from .schema import (
    DEFAULT_RESOLUTION,
    GRID_SHAPE,
    MAX_WINDOW_DAYS,
    SCHEMA,
    VARIABLE_KEYS,
    EventWindow,
    GridSnapshot,
    Label,
    VariableSchema,
    validate_snapshot,
    validate_window,
)

FORMAT_VERSION = 1
CATALOG_HEADER = ("event_id", "date", "lat", "lon", "label")
REGION_SIZE_DEG = 5.0
DEFAULT_MIN_GAP_DAYS = 10


# -- regions -----------------------------------------------------------------


def region_origin(lat: float, lon: float) -> tuple[float, float]:
    """South-west corner of the 5x5 degree box containing ``(lat, lon)``."""
    return (
        REGION_SIZE_DEG * math.floor(lat / REGION_SIZE_DEG),
        REGION_SIZE_DEG * math.floor(lon / REGION_SIZE_DEG),
    )


def region_id_for_origin(lat0: float, lon0: float) -> str:
    ns = "N" if lat0 >= 0 else "S"
    ew = "E" if lon0 >= 0 else "W"
    return f"{ns}{abs(int(lat0)):02d}{ew}{abs(int(lon0)):03d}"


def region_id_for(lat: float, lon: float) -> str:
    return region_id_for_origin(*region_origin(lat, lon))


# -- snapshot documents ------------------------------------------------------


def snapshot_to_document(s: GridSnapshot) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "region_id": s.region_id,
        "date": s.date.isoformat(),
        "lat0": s.lat0,
        "lon0": s.lon0,
        "resolution": s.resolution,
        "shape": list(GRID_SHAPE),
        "variables": {k: s.layers[k].tolist() for k in VARIABLE_KEYS if k in s.layers},
    }


def serialize_snapshot(s: GridSnapshot) -> bytes:
    return json.dumps(snapshot_to_document(s), separators=(",", ":")).encode("utf-8")


def parse_snapshot_file(data: bytes) -> GridSnapshot:
    """Decode one snapshot document and validate it."""
    try:
        doc = json.loads(data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data)
    except UnicodeDecodeError as exc:
        raise DocumentSyntaxError(f"snapshot is not UTF-8: {exc}", offset=exc.start) from exc
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(f"malformed snapshot JSON: {exc.msg}", offset=exc.pos) from exc
    return validate_snapshot(snapshot_from_document(doc))


def snapshot_from_document(doc, path: str = "$") -> GridSnapshot:
    if not isinstance(doc, dict):
        raise DocumentSyntaxError("snapshot document must be an object", path=path)
    version = _field(doc, "format_version", int, path)
    if version != FORMAT_VERSION:
        raise DocumentSyntaxError(f"unsupported snapshot format_version {version}", path=f"{path}.format_version")
    region_id = _field(doc, "region_id", str, path)
    date = _parse_date(_field(doc, "date", str, path), f"{path}.date")
    lat0 = float(_field(doc, "lat0", (int, float), path))
    lon0 = float(_field(doc, "lon0", (int, float), path))
    resolution = float(_field(doc, "resolution", (int, float), path))
    shape = doc.get("shape", list(GRID_SHAPE))
    if shape != list(GRID_SHAPE):
        raise ShapeError(f"declared shape {shape} is not {list(GRID_SHAPE)}")
    variables = _field(doc, "variables", dict, path)
    layers = {}
    for key, rows in variables.items():
        layers[key] = _parse_layer(rows, key, f"{path}.variables.{key}")
    return GridSnapshot(region_id, date, lat0, lon0, resolution, layers)


def _field(doc, key, types, path):
    if key not in doc:
        raise DocumentSyntaxError(f"missing field {key!r}", path=f"{path}.{key}")
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise DocumentSyntaxError(f"field {key!r} has wrong type", path=f"{path}.{key}")
    return value


def _parse_date(text, path):
    try:
        return dt.date.fromisoformat(text)
    except ValueError as exc:
        raise DocumentSyntaxError(f"bad date {text!r}", path=path) from exc


def _parse_layer(rows, key, path) -> np.ndarray:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise DocumentSyntaxError(f"layer {key!r} must be a list of rows", path=path)
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        count = sum(len(r) for r in rows)
        raise ShapeError(f"layer {key!r} is ragged ({count} values in {len(rows)} rows)")
    if not rows:
        return np.zeros((0, 0))
    try:
        arr = np.array(rows)
    except (TypeError, ValueError):
        arr = None
    if arr is None or arr.dtype.kind not in "fi":
        # slow path only to locate the offending entry
        for i, row in enumerate(rows):
            for j, v in enumerate(row):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise DocumentSyntaxError(f"non-numeric entry in {key!r}", path=f"{path}[{i}][{j}]")
    return arr.astype(np.float64)


def read_snapshot(path) -> GridSnapshot:
    return parse_snapshot_file(Path(path).read_bytes())


def snapshot_filename(region_id: str, date: dt.date) -> str:
    return f"{region_id}_{date.isoformat()}.json"


def write_snapshot(s: GridSnapshot, directory) -> Path:
    path = Path(directory) / snapshot_filename(s.region_id, s.date)
    path.write_bytes(serialize_snapshot(s))
    return path


class SnapshotDirectory:
    """``(date, region_id) -> GridSnapshot | None`` lookup over flat directories."""

    def __init__(self, *directories):
        self.directories = [Path(d) for d in directories]

    def __call__(self, date: dt.date, region_id: str):
        name = snapshot_filename(region_id, date)
        for d in self.directories:
            path = d / name
            if path.is_file():
                return read_snapshot(path)
        return None


# -- catalogs ----------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    event_id: str
    date: dt.date
    lat: float
    lon: float
    label: Label

    @property
    def region_id(self) -> str:
        return region_id_for(self.lat, self.lon)


def parse_event_catalog(data: bytes) -> list[CatalogEntry]:
    try:
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
    except UnicodeDecodeError as exc:
        raise DocumentSyntaxError(f"catalog is not UTF-8: {exc}", offset=exc.start) from exc
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    entries: list[CatalogEntry] = []
    seen: dict[str, int] = {}
    try:
        header = next(reader, None)
        if header is None or tuple(header) != CATALOG_HEADER:
            raise DocumentSyntaxError(
                f"catalog header must be {','.join(CATALOG_HEADER)!r}, got {header!r}", line=1
            )
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            entry = _parse_catalog_row(row, line)
            if entry.event_id in seen:
                first = seen[entry.event_id]
                raise DuplicateIdError(
                    f"event_id {entry.event_id!r} on lines {first} and {line}",
                    event_id=entry.event_id,
                    lines=(first, line),
                )
            seen[entry.event_id] = line
            entries.append(entry)
    except csv.Error as exc:
        raise DocumentSyntaxError(f"malformed CSV: {exc}", line=reader.line_num) from exc
    return entries


def _parse_catalog_row(row, line) -> CatalogEntry:
    if len(row) != len(CATALOG_HEADER):
        raise DocumentSyntaxError(f"line {line}: expected 5 fields, got {len(row)}", line=line)
    event_id, date_s, lat_s, lon_s, label_s = row
    if not event_id:
        raise DocumentSyntaxError(f"line {line}: empty event_id", line=line)
    try:
        date = dt.date.fromisoformat(date_s)
        lat = float(lat_s)
        lon = float(lon_s)
        label = Label(label_s)
    except ValueError as exc:
        raise DocumentSyntaxError(f"line {line}: {exc}", line=line) from exc
    if not (-90.0 <= lat <= 90.0):
        raise RangeError(f"line {line}: lat {lat} outside [-90, 90]", variable="lat", value=lat, line=line)
    if not (-180.0 <= lon < 180.0):
        raise RangeError(f"line {line}: lon {lon} outside [-180, 180)", variable="lon", value=lon, line=line)
    return CatalogEntry(event_id, date, lat, lon, label)


def serialize_event_catalog(entries: Iterable[CatalogEntry]) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CATALOG_HEADER)
    for e in entries:
        writer.writerow([e.event_id, e.date.isoformat(), repr(float(e.lat)), repr(float(e.lon)), e.label.value])
    return buf.getvalue().encode("utf-8")


def read_event_catalog(path) -> list[CatalogEntry]:
    return parse_event_catalog(Path(path).read_bytes())


def tornado_dates_by_region(entries: Iterable[CatalogEntry]) -> dict[str, set[dt.date]]:
    out: dict[str, set[dt.date]] = {}
    for e in entries:
        if e.label is Label.TORNADO:
            out.setdefault(e.region_id, set()).add(e.date)
    return out


def select_negatives(
    candidates: Sequence[CatalogEntry],
    tornado_dates_by_region: Mapping[str, Iterable[dt.date]],
    min_gap_days: int = DEFAULT_MIN_GAP_DAYS,
) -> list[CatalogEntry]:
    """Keep null events at least ``min_gap_days`` from every same-region tornado.

    The bound is inclusive: a gap of exactly ``min_gap_days`` is kept.
    """
    if min_gap_days < 0:
        raise ValueError("min_gap_days must be >= 0")
    ordinals = {r: sorted(d.toordinal() for d in dates) for r, dates in tornado_dates_by_region.items()}
    kept = []
    for c in candidates:
        day = c.date.toordinal()
        if all(abs(day - t) >= min_gap_days for t in ordinals.get(c.region_id, ())):
            kept.append(c)
    return kept


# -- datasets ----------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    windows: tuple[EventWindow, ...]
    schema: VariableSchema = SCHEMA
    provenance: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(self.windows))
        days = {w.days for w in self.windows}
        if len(days) > 1:
            raise WindowError(f"windows disagree on day count: {sorted(days)}")
        ids = [w.event_id for w in self.windows]
        if len(set(ids)) != len(ids):
            raise DuplicateIdError("duplicate event_id in dataset")

    @property
    def window_days(self) -> int | None:
        return self.windows[0].days if self.windows else None

    def __len__(self):
        return len(self.windows)

    def labels(self) -> np.ndarray:
        """1 for tornado, 0 for null event, in window order."""
        return np.array([w.label is Label.TORNADO for w in self.windows], dtype=np.int8)

    def replace(self, windows, **provenance) -> "Dataset":
        return Dataset(tuple(windows), self.schema, {**self.provenance, **provenance})


def assemble_dataset(
    catalog: Sequence[CatalogEntry],
    snapshot_source: Callable[[dt.date, str], GridSnapshot | None],
    window_days: int = MAX_WINDOW_DAYS,
    provenance: Mapping | None = None,
) -> Dataset:
    """Build one :class:`EventWindow` per catalog entry with a complete window.

    Entries missing any of the ``window_days`` snapshots before their date
    are skipped; the count lands in ``provenance["skipped"]``.
    """
    if not 1 <= window_days <= MAX_WINDOW_DAYS:
        raise ValueError(f"window_days must be in 1..{MAX_WINDOW_DAYS}")
    windows = []
    skipped = 0
    for entry in catalog:
        region = entry.region_id
        snaps = []
        for lag in range(window_days, 0, -1):
            s = snapshot_source(entry.date - dt.timedelta(days=lag), region)
            if s is None:
                break
            snaps.append(s)
        if len(snaps) < window_days:
            skipped += 1
            continue
        windows.append(validate_window(EventWindow(entry.event_id, entry.label, entry.date, tuple(snaps))))
    if not windows:
        raise EmptyDatasetError(f"no catalog entry has a complete {window_days}-day window", skipped=skipped)
    meta = dict(provenance or {})
    meta["skipped"] = skipped
    return Dataset(tuple(windows), SCHEMA, meta)


def dataset_to_document(d: Dataset) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "window_days": d.window_days,
        "schema": [{"key": v.key, "unit": v.unit} for v in d.schema],
        "provenance": dict(d.provenance),
        "windows": [
            {
                "event_id": w.event_id,
                "label": w.label.value,
                "target_date": w.target_date.isoformat(),
                "snapshots": [snapshot_to_document(s) for s in w.snapshots],
            }
            for w in d.windows
        ],
    }


def serialize_dataset(d: Dataset) -> bytes:
    return json.dumps(dataset_to_document(d), separators=(",", ":")).encode("utf-8")


def parse_dataset(data: bytes) -> Dataset:
    try:
        doc = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DocumentSyntaxError(f"malformed dataset JSON: {exc}", offset=getattr(exc, "pos", None)) from exc
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise DocumentSyntaxError("unsupported dataset document", path="$.format_version")
    if not isinstance(doc.get("windows"), list):
        raise DocumentSyntaxError("dataset needs a 'windows' list", path="$.windows")
    windows = []
    for i, wd in enumerate(doc["windows"]):
        path = f"$.windows[{i}]"
        try:
            snaps = tuple(
                validate_snapshot(snapshot_from_document(sd, f"{path}.snapshots[{j}]"))
                for j, sd in enumerate(wd["snapshots"])
            )
            window = EventWindow(wd["event_id"], Label(wd["label"]), dt.date.fromisoformat(wd["target_date"]), snaps)
        except TornadetError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise DocumentSyntaxError(f"bad window: {exc}", path=path) from exc
        windows.append(validate_window(window))
    return Dataset(tuple(windows), SCHEMA, doc.get("provenance", {}))


def read_dataset(path) -> Dataset:
    return parse_dataset(Path(path).read_bytes())


def write_dataset(d: Dataset, path) -> None:
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(serialize_dataset(d))
    os.replace(tmp, path)
