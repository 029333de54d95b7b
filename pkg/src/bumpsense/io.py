"""Recording, label, event and result file formats.

All numeric fields are written with Python's shortest round-trip float
representation, so write -> read reproduces every value bit-exactly.

Recording CSV: header ``t_ms,ax,ay,az,rx,ry,rz`` then one row per sample.
Label sidecar CSV (``<stem>.labels.csv``): header ``t_ms,segment``.
Events and results are JSON-lines with a self-describing header record.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .classify import ClassificationResult
from .core import CHANNELS, DEFAULT_PADDING, EventFrame, SampleStream, stream_from_arrays
from .detect import DetectionEvent

RECORDING_HEADER = "t_ms," + ",".join(CHANNELS)
LABELS_HEADER = "t_ms,segment"
EVENTS_FORMAT = "bumpsense-events"
RESULTS_FORMAT = "bumpsense-results"
FORMAT_VERSION = 1


class RecordingParseError(ValueError):
    """A recording or sidecar file row could not be parsed."""


def _fmt(x: float) -> str:
    return repr(float(x))


def labels_path_for(recording_path: str | Path) -> Path:
    p = Path(recording_path)
    return p.with_name(p.stem + ".labels.csv")


def write_recording(stream: SampleStream, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(RECORDING_HEADER + "\n")
        cols = [stream.t_ms] + [stream.channels[c] for c in CHANNELS]
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_recording(path: str | Path, rate_hz: float = 100.0) -> SampleStream:
    """Parse a recording CSV; raises :class:`RecordingParseError` with the
    offending line number on malformed rows."""
    t: list[float] = []
    cols: dict[str, list[float]] = {c: [] for c in CHANNELS}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != RECORDING_HEADER:
            raise RecordingParseError(
                f"{path}: line 1: expected header {RECORDING_HEADER!r}, got {header!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise RecordingParseError(
                    f"{path}: line {lineno}: expected 7 fields, got {len(parts)}"
                )
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise RecordingParseError(
                    f"{path}: line {lineno}: unparseable value in {line!r}"
                ) from None
            if not all(np.isfinite(values)):
                raise RecordingParseError(
                    f"{path}: line {lineno}: non-finite value in {line!r}"
                )
            t.append(values[0])
            for c, v in zip(CHANNELS, values[1:]):
                cols[c].append(v)
    if not t:
        raise RecordingParseError(f"{path}: no samples")
    return stream_from_arrays(np.array(t), {c: np.array(v) for c, v in cols.items()}, rate_hz)


def write_labels(labels: Sequence[tuple[float, str]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(LABELS_HEADER + "\n")
        for t_ms, seg in labels:
            fh.write(f"{_fmt(t_ms)},{seg}\n")


def read_labels(path: str | Path) -> list[tuple[float, str]]:
    out: list[tuple[float, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != LABELS_HEADER:
            raise RecordingParseError(
                f"{path}: line 1: expected header {LABELS_HEADER!r}, got {header!r}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise RecordingParseError(
                    f"{path}: line {lineno}: expected 2 fields, got {len(parts)}"
                )
            try:
                out.append((float(parts[0]), parts[1]))
            except ValueError:
                raise RecordingParseError(
                    f"{path}: line {lineno}: unparseable time {parts[0]!r}"
                ) from None
    return out


# -- events files ---------------------------------------------------------------


def write_events(
    events: Sequence[DetectionEvent],
    path: str | Path,
    rate_hz: float = 100.0,
    filter_variant: str = "off",
    padding: int = DEFAULT_PADDING,
) -> None:
    frame_len = events[0].frame.frame_len if events else 0
    header = {
        "format": EVENTS_FORMAT,
        "version": FORMAT_VERSION,
        "rate_hz": rate_hz,
        "frame_len": frame_len,
        "padding": padding,
        "filter": filter_variant,
        "count": len(events),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
        for ev in events:
            rec = {
                "entry_index": ev.entry_index,
                "t_start": ev.frame.t_start,
                "peak_index": ev.frame.peak_index,
                "label": ev.frame.label,
                "padded": ev.frame.padded,
                "channels": {c: [float(v) for v in ev.frame.channels[c]] for c in CHANNELS},
            }
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_events(path: str | Path) -> tuple[list[DetectionEvent], dict]:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != EVENTS_FORMAT:
            raise RecordingParseError(f"{path}: not a {EVENTS_FORMAT} file")
        events = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            frame = EventFrame(
                channels={c: np.array(rec["channels"][c]) for c in CHANNELS},
                peak_index=int(rec["peak_index"]),
                t_start=float(rec["t_start"]),
                label=rec["label"],
                padded=bool(rec["padded"]),
            )
            events.append(DetectionEvent(entry_index=int(rec["entry_index"]), frame=frame))
    return events, header


# -- result records ---------------------------------------------------------------


def result_record(
    index: int,
    event: DetectionEvent,
    result: ClassificationResult,
    with_timings: bool = False,
    rate_hz: float = 100.0,
) -> dict:
    """One per-event output record.

    Timing is opt-in: the default record is a pure function of the input
    stream and model, so runs compare byte-for-byte.
    """
    spacing_ms = 1000.0 / rate_hz
    rec = {
        "event": index,
        "entry_index": event.entry_index,
        "t_entry_ms": event.frame.t_start + event.frame.peak_index * spacing_ms,
        "winner": result.winner,
        "norms": {seg: result.norms[seg] for seg in result.norms},
    }
    if with_timings:
        rec["elapsed_ms"] = result.elapsed_ms
    return rec


def results_header(model_approach: str, filter_variant: str) -> dict:
    return {
        "format": RESULTS_FORMAT,
        "version": FORMAT_VERSION,
        "approach": model_approach,
        "filter": filter_variant,
    }


def write_results(
    records: Iterable[Mapping], fh: TextIO, header: Mapping | None = None
) -> None:
    if header is not None:
        fh.write(json.dumps(header, separators=(",", ":")) + "\n")
    for rec in records:
        fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
