"""Rolling per-region snapshot buffers that turn a daily feed into alerts."""

from __future__ import annotations

import datetime as dt
import json
from collections import deque
from dataclasses import dataclass, field

from .classifiers import DEFAULT_THRESHOLD, TrainedModel, predict_proba_batch
from .errors import LengthMismatchError, TornadetError
from .features import FEATURES_PER_DAY, build_feature_vector
from .schema import MAX_WINDOW_DAYS, EventWindow, GridSnapshot, Label, validate_snapshot


class OutOfOrderError(TornadetError):
    """A snapshot is not newer than the latest one buffered for its region."""


@dataclass(frozen=True)
class AlertRecord:
    region_id: str
    target_date: dt.date
    probability: float
    alert: bool
    model_id: str
    window_days: int

    def to_dict(self) -> dict:
        return {
            "region_id": self.region_id,
            "target_date": self.target_date.isoformat(),
            "probability": self.probability,
            "alert": self.alert,
            "model_id": self.model_id,
            "window_days": self.window_days,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


@dataclass
class MonitorState:
    """Per-region buffers of consecutive daily snapshots.

    Parameters
    ----------
    model : TrainedModel
        Its feature length fixes how many days each prediction consumes.
    threshold : float
        Alert when the probability is at least this value.
    window_days : int, optional
        Must match the model; defaults to the model's window size.
    """

    model: TrainedModel
    threshold: float = DEFAULT_THRESHOLD
    window_days: int | None = None
    buffers: dict = field(default_factory=dict)

    def __post_init__(self):
        days, rem = divmod(self.model.feature_length, FEATURES_PER_DAY)
        if rem or not 1 <= days <= MAX_WINDOW_DAYS:
            raise LengthMismatchError(f"model feature length {self.model.feature_length} is not a whole window")
        if self.window_days is None:
            self.window_days = days
        if self.window_days != days:
            raise LengthMismatchError(f"model consumes {days}-day windows, monitor configured for {self.window_days}")
        self._model_id = self.model.model_id

    @property
    def model_id(self) -> str:
        return self._model_id

    def feed(self, snapshot: GridSnapshot) -> AlertRecord | None:
        """Buffer one snapshot; return an alert once enough consecutive days are held.

        Raises
        ------
        TornadetError
            The snapshot is invalid or not newer than the region's latest
            buffered day.  The buffer is left untouched.
        """
        validate_snapshot(snapshot)
        buf = self.buffers.setdefault(snapshot.region_id, deque(maxlen=MAX_WINDOW_DAYS))
        if buf:
            last = buf[-1]
            if snapshot.date <= last.date:
                raise OutOfOrderError(
                    f"{snapshot.region_id} snapshot dated {snapshot.date} is not after buffered {last.date}"
                )
            # a skipped day or a moved grid starts a fresh run
            if snapshot.date != last.date + dt.timedelta(days=1) or not snapshot.same_grid(last):
                buf.clear()
        buf.append(snapshot)
        if len(buf) < self.window_days:
            return None
        recent = tuple(buf)[-self.window_days :]
        target = snapshot.date + dt.timedelta(days=1)
        window = EventWindow(f"{snapshot.region_id}@{target.isoformat()}", Label.NULL_EVENT, target, recent)
        x = build_feature_vector(window).values
        probability = float(predict_proba_batch(self.model, x[None, :])[0])
        return AlertRecord(
            region_id=snapshot.region_id,
            target_date=target,
            probability=probability,
            alert=probability >= self.threshold,
            model_id=self.model_id,
            window_days=self.window_days,
        )
