"""POD/FAR verification, the year split and the day-window ablation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .classifiers import DISPLAY_NAMES, ModelSpec, TrainedModel, decide, fit, predict_proba_batch
from .errors import FutureEventError, RangeError, TornadetError
from .features import FEATURES_PER_DAY, feature_matrix, window_suffix
from .ingestion import Dataset
from .schema import MAX_WINDOW_DAYS, EventWindow

UNDEFINED = "undefined"


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_decisions(cls, truth, decisions) -> "ConfusionCounts":
        truth = np.asarray(truth).astype(bool)
        decisions = np.asarray(decisions).astype(bool)
        return cls(
            tp=int((truth & decisions).sum()),
            fp=int((~truth & decisions).sum()),
            tn=int((~truth & ~decisions).sum()),
            fn=int((truth & ~decisions).sum()),
        )

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def pod(c: ConfusionCounts) -> float:
    """Probability of detection ``tp / (tp + fn)``; NaN when no events occurred."""
    denom = c.tp + c.fn
    return c.tp / denom if denom else math.nan


def far(c: ConfusionCounts) -> float:
    """False alarm ratio ``fp / (tp + fp)``; NaN when no alert was issued."""
    denom = c.tp + c.fp
    return c.fp / denom if denom else math.nan


def metric_json(value: float):
    return UNDEFINED if math.isnan(value) else value


def metric_text(value: float) -> str:
    return "undef" if math.isnan(value) else f"{value:.2f}"


# -- splitting ---------------------------------------------------------------


def split_by_year(d: Dataset, test_year: int) -> tuple[Dataset, Dataset]:
    """Windows dated ``test_year`` form the test set, earlier years the training set."""
    train, test = [], []
    for w in d.windows:
        year = w.target_date.year
        if year > test_year:
            raise FutureEventError(f"window {w.event_id!r} dated {w.target_date} is after test year {test_year}")
        (test if year == test_year else train).append(w)
    return (
        d.replace(train, split=f"target year < {test_year}"),
        d.replace(test, split=f"target year == {test_year}"),
    )


def truncate_window(w: EventWindow, days: int) -> EventWindow:
    """Keep the ``days`` snapshots nearest the target date."""
    if not 1 <= days <= w.days:
        raise RangeError(f"days must be in 1..{w.days}, got {days}", variable="days", value=days)
    return EventWindow(w.event_id, w.label, w.target_date, w.snapshots[w.days - days :])


def truncate_dataset(d: Dataset, days: int) -> Dataset:
    return d.replace([truncate_window(w, days) for w in d.windows])


# -- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class ReportCell:
    spec: ModelSpec
    window_days: int
    counts: ConfusionCounts

    @property
    def pod(self) -> float:
        return pod(self.counts)

    @property
    def far(self) -> float:
        return far(self.counts)

    def to_dict(self) -> dict:
        return {
            "kind": self.spec.kind,
            "window_days": self.window_days,
            "counts": self.counts.to_dict(),
            "pod": metric_json(self.pod),
            "far": metric_json(self.far),
            "spec": self.spec.to_dict(),
        }


@dataclass(frozen=True)
class EvalReport:
    cells: tuple[ReportCell, ...]
    metadata: Mapping = field(default_factory=dict)

    def cell(self, kind: str, window_days: int) -> ReportCell:
        for c in self.cells:
            if c.spec.kind == kind and c.window_days == window_days:
                return c
        raise KeyError((kind, window_days))

    def to_json(self) -> bytes:
        doc = {"format_version": 1, "metadata": dict(self.metadata), "cells": [c.to_dict() for c in self.cells]}
        return (json.dumps(doc, indent=2, allow_nan=False) + "\n").encode("utf-8")

    def to_table(self) -> str:
        return format_table(self)


def format_table(report: EvalReport) -> str:
    """Plain-text grid: one row per classifier, a POD/FAR column pair per window size."""
    windows = sorted({c.window_days for c in report.cells}, reverse=True)
    rows: list[str] = []
    seen = []
    by_key = {}
    for c in report.cells:
        key = json.dumps(c.spec.to_dict(), sort_keys=True)
        if key not in seen:
            seen.append(key)
        by_key[(key, c.window_days)] = c
    names = [DISPLAY_NAMES[json.loads(k)["kind"]] for k in seen]
    name_w = max([len("Classifier")] + [len(n) for n in names])
    pair_w = 13

    def day_label(n):
        return f"{n} Day" if n == 1 else f"{n} Days"

    header = "Classifier".ljust(name_w) + "".join(" | " + day_label(n).center(pair_w) for n in windows)
    sub = " " * name_w + "".join(" | " + f"{'POD':>5}   {'FAR':>5}".center(pair_w) for _ in windows)
    rule = "-" * len(header)
    rows += [rule, header, sub, rule]
    for key, name in zip(seen, names):
        line = name.ljust(name_w)
        for n in windows:
            c = by_key.get((key, n))
            if c is None:
                line += " | " + "".center(pair_w)
            else:
                line += " | " + f"{metric_text(c.pod):>5}   {metric_text(c.far):>5}".center(pair_w)
        rows.append(line)
    rows.append(rule)
    return "\n".join(r.rstrip() for r in rows) + "\n"


class AblationError(TornadetError):
    def __init__(self, message, *, kind, window_days):
        super().__init__(message)
        self.kind = kind
        self.window_days = window_days


def evaluate_model(model: TrainedModel, test: Dataset, threshold: float = 0.5) -> tuple[ConfusionCounts, np.ndarray]:
    """Counts and probabilities of ``model`` on the most recent days of each test window."""
    days = model.feature_length // FEATURES_PER_DAY
    if test.window_days is None or days > test.window_days:
        raise RangeError(f"model needs {days}-day windows, dataset has {test.window_days}")
    X = window_suffix(feature_matrix(test.windows), days)
    proba = predict_proba_batch(model, X)
    return ConfusionCounts.from_decisions(test.labels(), decide(proba, threshold)), proba


def run_ablation(
    train: Dataset,
    test: Dataset,
    specs: Sequence[ModelSpec],
    windows: Sequence[int] = (5, 4, 3, 2, 1),
    threshold: float = 0.5,
    n_jobs: int = 1,
    metadata: Mapping | None = None,
) -> EvalReport:
    """Fit and score every ``(spec, window size)`` pair.

    A ``w``-day cell uses the last ``w`` days of every window; its features
    are the trailing ``w * 56`` columns of the full-window features.  Cells
    are ordered by spec, then by descending window size.
    """
    windows = sorted(set(windows), reverse=True)
    if not windows or windows[-1] < 1 or windows[0] > MAX_WINDOW_DAYS:
        raise RangeError(f"window sizes must lie in 1..{MAX_WINDOW_DAYS}, got {windows}")
    if len(train) == 0 or len(test) == 0:
        raise RangeError("ablation needs non-empty train and test sets")
    if windows[0] > min(train.window_days, test.window_days):
        raise RangeError(f"datasets hold {min(train.window_days, test.window_days)}-day windows, need {windows[0]}")
    X_train = feature_matrix(train.windows)
    X_test = feature_matrix(test.windows)
    y_train = train.labels()
    y_test = test.labels()
    cells = []
    for spec in specs:
        for w in windows:
            try:
                model = fit(spec, window_suffix(X_train, w), y_train, n_jobs=n_jobs)
            except TornadetError as exc:
                raise AblationError(f"{spec.kind} with {w}-day window: {exc}", kind=spec.kind, window_days=w) from exc
            proba = predict_proba_batch(model, window_suffix(X_test, w))
            counts = ConfusionCounts.from_decisions(y_test, decide(proba, threshold))
            cells.append(ReportCell(spec, w, counts))
    meta = {
        "threshold": threshold,
        "windows": windows,
        "n_train": len(train),
        "n_test": len(test),
        "n_test_tornado": int(y_test.sum()),
        "n_test_null": int(len(y_test) - y_test.sum()),
        "seeds": sorted({s.seed for s in specs}),
    }
    meta.update(metadata or {})
    return EvalReport(tuple(cells), meta)
