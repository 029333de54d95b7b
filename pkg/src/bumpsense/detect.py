"""Serial, continuous peak detection over forward/lateral acceleration and
extraction of fixed-length event frames.

A peak is the first decline after a running extremum beyond the +/-1 m/s^2
thresholds (or a drop back inside them).  The forward axis is checked on
every sample; the lateral axis only on samples where the forward axis
peaked, and an event fires when both flag a peak on the same sample.  After
an event the cursor skips one frame length, so events never overlap.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    CHANNELS,
    DEFAULT_FRAME_LEN,
    DEFAULT_PADDING,
    EventFrame,
    SampleStream,
    SensorSample,
)

logger = logging.getLogger(__name__)

X_MODE_NESTED = "nested"
X_MODE_PARALLEL = "parallel"


@dataclass(frozen=True)
class PeakState:
    """Running extrema of one axis between detected peaks."""

    pos_val: float = 0.0
    neg_val: float = 0.0
    pos_thresh: float = 1.0
    neg_thresh: float = -1.0

    def __post_init__(self) -> None:
        if not (self.pos_thresh > 0 > self.neg_thresh):
            raise ValueError(
                f"thresholds must straddle zero, got ({self.pos_thresh}, {self.neg_thresh})"
            )
        if self.pos_val < 0 or self.neg_val > 0:
            raise ValueError("pos_val must be >= 0 and neg_val <= 0")


def detect_peak_step(state: PeakState, value: float) -> tuple[PeakState, bool]:
    """Advance one axis state by one sample; flag whether a peak fired.

    Branches: a value at or beyond a threshold either extends the running
    extremum or, on the first decline, fires a peak; a value back inside the
    threshold while an extremum is pending also fires.  Both extrema reset
    to zero when a peak fires.
    """
    v = float(value)
    if not np.isfinite(v):
        raise ValueError(f"non-finite sample value {value!r}")
    pos_val, neg_val = state.pos_val, state.neg_val
    is_peak = False

    if v >= state.pos_thresh:
        if v >= pos_val:
            pos_val = v
        else:
            is_peak = True
    elif pos_val > 0:
        is_peak = True

    if v <= state.neg_thresh:
        if v <= neg_val:
            neg_val = v
        else:
            is_peak = True
    elif neg_val < 0:
        is_peak = True

    if is_peak:
        pos_val = 0.0
        neg_val = 0.0
    return replace(state, pos_val=pos_val, neg_val=neg_val), is_peak


@dataclass(frozen=True)
class DetectorConfig:
    pos_thresh: float = 1.0
    neg_thresh: float = -1.0
    frame_len: int = DEFAULT_FRAME_LEN
    padding: int = DEFAULT_PADDING
    x_mode: str = X_MODE_NESTED

    def __post_init__(self) -> None:
        if not (self.pos_thresh > 0 > self.neg_thresh):
            raise ValueError("thresholds must straddle zero")
        if not 0 <= self.padding < self.frame_len:
            raise ValueError(
                f"need 0 <= padding < frame_len, got {self.padding}, {self.frame_len}"
            )
        if self.x_mode not in (X_MODE_NESTED, X_MODE_PARALLEL):
            raise ValueError(f"unknown x_mode {self.x_mode!r}")


@dataclass(frozen=True)
class DetectionEvent:
    """A detected entry point plus its extracted frame."""

    entry_index: int
    frame: EventFrame


class EventDetector:
    """Incremental per-stream detector; one instance per stream.

    Push samples in order; an event is returned as soon as its frame is
    fully buffered (``frame_len - padding - 1`` samples after the entry
    point).  Chunking has no effect on the output.
    """

    def __init__(self, config: DetectorConfig | None = None, rate_hz: float = 100.0):
        self.config = config if config is not None else DetectorConfig()
        self.rate_hz = rate_hz
        self._y = PeakState(pos_thresh=self.config.pos_thresh, neg_thresh=self.config.neg_thresh)
        self._x = PeakState(pos_thresh=self.config.pos_thresh, neg_thresh=self.config.neg_thresh)
        self._index = 0
        self._skip_until = 0
        self._history: deque[SensorSample] = deque(maxlen=self.config.padding)
        self._pending: list[SensorSample] | None = None
        self._pending_entry = -1
        self._pending_head_pad = 0

    @property
    def has_pending(self) -> bool:
        """A frame is currently being buffered."""
        return self._pending is not None

    def reset_peaks(self) -> None:
        """Forget running extrema (used when the input had a gap)."""
        self._y = replace(self._y, pos_val=0.0, neg_val=0.0)
        self._x = replace(self._x, pos_val=0.0, neg_val=0.0)

    def abort_pending(self) -> None:
        """Discard a partially buffered frame (gap inside the frame)."""
        self._pending = None

    def push(self, sample: SensorSample) -> DetectionEvent | None:
        i = self._index
        self._index += 1
        event = None

        if self._pending is not None:
            self._pending.append(sample)
            if self._pending_head_pad + len(self._pending) == self.config.frame_len:
                event = self._finish_pending(padded=self._pending_head_pad > 0)

        if i >= self._skip_until:
            self._y, is_y = detect_peak_step(self._y, sample.ay)
            if self.config.x_mode == X_MODE_NESTED:
                is_x = False
                if is_y:
                    self._x, is_x = detect_peak_step(self._x, sample.ax)
            else:
                self._x, is_x = detect_peak_step(self._x, sample.ax)
            if is_y and is_x and self._pending is None:
                self._begin_pending(i, sample)
                self._skip_until = i + self.config.frame_len
                self.reset_peaks()
                if self._pending_head_pad + len(self._pending) == self.config.frame_len:
                    event = self._finish_pending(padded=self._pending_head_pad > 0)

        self._history.append(sample)
        return event

    def _begin_pending(self, entry: int, current: SensorSample) -> None:
        pre = list(self._history)
        self._pending_head_pad = self.config.padding - len(pre)
        self._pending = pre + [current]
        self._pending_entry = entry

    def _finish_pending(self, padded: bool) -> DetectionEvent:
        assert self._pending is not None
        samples = self._pending
        head = self._pending_head_pad
        n = self.config.frame_len
        spacing = 1000.0 / self.rate_hz
        cols = {c: np.zeros(n) for c in CHANNELS}
        for k, s in enumerate(samples):
            for c in CHANNELS:
                cols[c][head + k] = getattr(s, c)
        t_start = samples[0].t - head * spacing
        frame = EventFrame(
            channels=cols,
            peak_index=self.config.padding,
            t_start=t_start,
            padded=padded or head > 0,
        )
        entry = self._pending_entry
        self._pending = None
        return DetectionEvent(entry_index=entry, frame=frame)

    def flush(self) -> DetectionEvent | None:
        """Emit a zero-padded frame if the stream ended mid-frame."""
        if self._pending is None:
            return None
        missing = self.config.frame_len - self._pending_head_pad - len(self._pending)
        logger.warning(
            "stream ended %d samples before frame completion; zero-padding tail",
            missing,
        )
        return self._finish_pending(padded=True)


def detect_events(
    stream: SampleStream, config: DetectorConfig | None = None
) -> list[DetectionEvent]:
    """One-shot detection over a whole stream."""
    cfg = config if config is not None else DetectorConfig()
    if len(stream) < cfg.frame_len:
        logger.warning(
            "stream of %d samples is shorter than one frame (%d); no events",
            len(stream),
            cfg.frame_len,
        )
        return []
    det = EventDetector(cfg, rate_hz=stream.rate_hz)
    events = []
    for s in stream.iter_samples():
        ev = det.push(s)
        if ev is not None:
            events.append(ev)
    ev = det.flush()
    if ev is not None:
        events.append(ev)
    return events
