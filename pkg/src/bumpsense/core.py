"""Core domain types: sensor samples, validated streams, the 12-segment
taxonomy, and fixed-length event frames.

Axis convention (device strapped flat on the vehicle, display up):
``ay`` runs along the forward driving direction, ``ax`` is lateral
(positive to the right), ``az`` is vertical.  Rotations ``rx, ry, rz``
are angular velocities in rad/s about the same axes; positive ``rz`` is
a counter-clockwise turn seen from above.

All types are immutable value data after construction and safe to share
between threads without synchronization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

#: Channel names in canonical order (acceleration in m/s^2, rotation in rad/s).
CHANNELS = ("ax", "ay", "az", "rx", "ry", "rz")

#: Nominal sampling rate of the capture device.
DEFAULT_RATE_HZ = 100.0

#: Event frame geometry: 500 ms frames with 50 ms pre-padding at 100 Hz.
DEFAULT_FRAME_LEN = 50
DEFAULT_PADDING = 5

#: Accepted deviation of inter-sample spacing, as a fraction of nominal.
SPACING_TOLERANCE = 0.5


class StreamOrderError(ValueError):
    """Timestamps are not strictly increasing."""


class StreamRateError(ValueError):
    """Inter-sample spacing deviates more than the tolerance from nominal."""


@dataclass(frozen=True)
class SensorSample:
    """One timestamped 6-axis reading.

    ``t`` is milliseconds since stream start; ``ax, ay, az`` are
    accelerations in m/s^2 and ``rx, ry, rz`` angular velocities in rad/s.
    """

    t: float
    ax: float
    ay: float
    az: float
    rx: float
    ry: float
    rz: float

    def __post_init__(self) -> None:
        values = (self.t, self.ax, self.ay, self.az, self.rx, self.ry, self.rz)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"sample at t={self.t!r} contains non-finite values")
        if self.t < 0:
            raise ValueError(f"negative timestamp {self.t!r}")

    def channel_values(self) -> tuple[float, ...]:
        return (self.ax, self.ay, self.az, self.rx, self.ry, self.rz)


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SampleStream:
    """An ordered, rate-validated sequence of samples in columnar form.

    ``channels`` maps each name in :data:`CHANNELS` to a read-only float64
    array; all arrays share the length of ``t_ms``.
    """

    t_ms: np.ndarray
    channels: Mapping[str, np.ndarray]
    rate_hz: float

    def __len__(self) -> int:
        return int(self.t_ms.shape[0])

    @property
    def nominal_spacing_ms(self) -> float:
        return 1000.0 / self.rate_hz

    def sample(self, i: int) -> SensorSample:
        return SensorSample(
            float(self.t_ms[i]), *(float(self.channels[c][i]) for c in CHANNELS)
        )

    def iter_samples(self) -> Iterable[SensorSample]:
        for i in range(len(self)):
            yield self.sample(i)


def stream_from_arrays(
    t_ms: np.ndarray,
    channels: Mapping[str, np.ndarray],
    rate_hz: float = DEFAULT_RATE_HZ,
) -> SampleStream:
    """Validate columnar data and build a :class:`SampleStream`.

    Raises :class:`StreamOrderError` for non-monotonic timestamps and
    :class:`StreamRateError` when any gap deviates more than ±50% from the
    nominal spacing ``1000 / rate_hz`` ms.
    """
    if rate_hz <= 0:
        raise ValueError(f"rate_hz must be positive, got {rate_hz}")
    t = np.asarray(t_ms, dtype=np.float64)
    if t.ndim != 1 or t.shape[0] == 0:
        raise ValueError("stream needs at least one sample")
    missing = [c for c in CHANNELS if c not in channels]
    if missing:
        raise ValueError(f"missing channels: {missing}")
    cols = {c: _frozen(channels[c]) for c in CHANNELS}
    for c, arr in cols.items():
        if arr.shape != t.shape:
            raise ValueError(f"channel {c} has shape {arr.shape}, expected {t.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"channel {c} contains non-finite values")
    if not np.all(np.isfinite(t)) or t[0] < 0:
        raise ValueError("timestamps must be finite and non-negative")
    if t.shape[0] > 1:
        dt = np.diff(t)
        if np.any(dt <= 0):
            i = int(np.argmax(dt <= 0))
            raise StreamOrderError(
                f"timestamps not strictly increasing at index {i + 1} "
                f"(t={t[i]!r} then {t[i + 1]!r})"
            )
        nominal = 1000.0 / rate_hz
        lo, hi = nominal * (1 - SPACING_TOLERANCE), nominal * (1 + SPACING_TOLERANCE)
        bad = (dt < lo) | (dt > hi)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise StreamRateError(
                f"spacing {dt[i]:g} ms at index {i + 1} outside "
                f"[{lo:g}, {hi:g}] ms for rate {rate_hz:g} Hz"
            )
    return SampleStream(t_ms=_frozen(t), channels=cols, rate_hz=float(rate_hz))


def make_stream(samples: Sequence[SensorSample], rate_hz: float = DEFAULT_RATE_HZ) -> SampleStream:
    """Build a validated stream from individual samples."""
    if len(samples) == 0:
        raise ValueError("stream needs at least one sample")
    t = np.array([s.t for s in samples], dtype=np.float64)
    cols = {
        c: np.array([getattr(s, c) for s in samples], dtype=np.float64)
        for c in CHANNELS
    }
    return stream_from_arrays(t, cols, rate_hz)


# -- Segment taxonomy ---------------------------------------------------------

STRAIGHT = "Straight"
DIAGONAL = "Diagonal"
REVERSED_DIAGONAL = "ReversedDiagonal"

_CATEGORY_ANGLE = {STRAIGHT: 90, DIAGONAL: 45, REVERSED_DIAGONAL: 135}


@dataclass(frozen=True)
class SegmentClass:
    """One of the 12 impact classes on the vehicle perimeter."""

    id: str
    category: str
    approach_angle_deg: int = field(compare=False)


def _seg(seg_id: str, category: str) -> SegmentClass:
    return SegmentClass(seg_id, category, _CATEGORY_ANGLE[category])


#: All 12 segments in canonical (tie-break) order.
CATALOG: tuple[SegmentClass, ...] = (
    _seg("F", STRAIGHT),
    _seg("B", STRAIGHT),
    _seg("L", STRAIGHT),
    _seg("R", STRAIGHT),
    _seg("FL", DIAGONAL),
    _seg("FR", DIAGONAL),
    _seg("BL", DIAGONAL),
    _seg("BR", DIAGONAL),
    _seg("FLB", REVERSED_DIAGONAL),
    _seg("FRB", REVERSED_DIAGONAL),
    _seg("BLF", REVERSED_DIAGONAL),
    _seg("BRF", REVERSED_DIAGONAL),
)

SEGMENT_IDS: tuple[str, ...] = tuple(s.id for s in CATALOG)

_BY_ID = {s.id: s for s in CATALOG}

#: Diagonal corner paired with the reversed-diagonal class on the same corner.
CORNER_PAIRS: tuple[tuple[str, str], ...] = (
    ("FL", "FLB"),
    ("FR", "FRB"),
    ("BL", "BLF"),
    ("BR", "BRF"),
)


def segment_catalog() -> tuple[SegmentClass, ...]:
    """All 12 segment classes, in a fixed, order-stable enumeration."""
    return CATALOG


def segment_by_id(seg_id: str) -> SegmentClass:
    try:
        return _BY_ID[seg_id]
    except KeyError:
        raise ValueError(f"unknown segment id {seg_id!r}") from None


# -- Event frames -------------------------------------------------------------


@dataclass(frozen=True)
class EventFrame:
    """A fixed-length multi-channel window cut around a detected entry point.

    ``peak_index`` is the position of the entry point inside the frame
    (the pre-padding length).  ``label`` carries ground truth when known.
    ``padded`` marks frames that ran past an edge of their stream and were
    zero-filled.
    """

    channels: Mapping[str, np.ndarray]
    peak_index: int
    t_start: float
    label: str | None = None
    padded: bool = False

    def __post_init__(self) -> None:
        missing = [c for c in CHANNELS if c not in self.channels]
        if missing:
            raise ValueError(f"missing channels: {missing}")
        lengths = {c: int(np.asarray(self.channels[c]).shape[0]) for c in CHANNELS}
        if len(set(lengths.values())) != 1:
            raise ValueError(f"channel lengths differ: {lengths}")
        n = lengths["ax"]
        if not 0 <= self.peak_index < n:
            raise ValueError(f"peak_index {self.peak_index} outside frame of {n}")
        if self.label is not None and self.label not in _BY_ID:
            raise ValueError(f"unknown segment label {self.label!r}")
        object.__setattr__(
            self, "channels", {c: _frozen(self.channels[c]) for c in CHANNELS}
        )

    @property
    def frame_len(self) -> int:
        return int(self.channels["ax"].shape[0])
