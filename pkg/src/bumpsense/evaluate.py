"""Batch evaluation: confusion matrices on the 360-degree ring, per-segment
accuracy, timing studies, and the six-arm comparison (three template
approaches times filtered/unfiltered).

The confusion matrix rows/columns follow the spatial order of the segments
around the vehicle, clockwise from the front:

    F, FR, R, BRF, BR, B, BL, BLF, L, FL, FLB, FRB, (wraps back to F)

so misclassifications into spatially adjacent segments concentrate near
the diagonal.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classify import classify
from .core import EventFrame, SEGMENT_IDS, SampleStream
from .detect import DetectionEvent, DetectorConfig, detect_events
from .dtw import DtwConfig
from .filtering import FilterSpec, apply_filter, design_lowpass
from .templates import APPROACHES, SegmentModel, build_models

#: Spatial 360-degree ordering of segments around the vehicle.
RING_ORDER: tuple[str, ...] = (
    "F", "FR", "R", "BRF", "BR", "B", "BL", "BLF", "L", "FL", "FLB", "FRB",
)

_RING_INDEX = {seg: i for i, seg in enumerate(RING_ORDER)}


@dataclass(frozen=True)
class EvalReport:
    """Confusion counts (rows = truth, columns = predicted) in ring order,
    plus accuracy and timing summaries."""

    order: tuple[str, ...]
    counts: np.ndarray
    per_segment_accuracy: Mapping[str, float]
    overall_accuracy: float
    macro_accuracy: float
    timing_ms: Mapping[str, float]
    n_events: int
    neighbor_error_fraction: float | None
    approach: str
    filter_variant: str

    def to_dict(self) -> dict:
        return {
            "approach": self.approach,
            "filter": self.filter_variant,
            "order": list(self.order),
            "counts": self.counts.astype(int).tolist(),
            "per_segment_accuracy": dict(self.per_segment_accuracy),
            "overall_accuracy": self.overall_accuracy,
            "macro_accuracy": self.macro_accuracy,
            "timing_ms": dict(self.timing_ms),
            "n_events": self.n_events,
            "neighbor_error_fraction": self.neighbor_error_fraction,
        }

    def render_table(self) -> str:
        width = max(len(s) for s in self.order) + 1
        lines = [
            f"approach={self.approach} filter={self.filter_variant} "
            f"events={self.n_events} overall={self.overall_accuracy:.3f}",
            " " * width + "".join(f"{s:>{width}}" for s in self.order),
        ]
        for i, seg in enumerate(self.order):
            row = "".join(f"{int(v):>{width}}" for v in self.counts[i])
            lines.append(f"{seg:>{width}}{row}")
        lines.append(
            "per-segment: "
            + " ".join(f"{s}={self.per_segment_accuracy[s]:.2f}" for s in self.order)
        )
        return "\n".join(lines)


def _ring_neighbors(i: int) -> tuple[int, int]:
    n = len(RING_ORDER)
    return ((i - 1) % n, (i + 1) % n)


def evaluate(
    model: SegmentModel,
    events: Sequence[EventFrame],
    config: DtwConfig | None = None,
) -> EvalReport:
    """Classify every labeled event and accumulate the report."""
    if not events:
        raise ValueError("no events to evaluate")
    counts = np.zeros((len(RING_ORDER), len(RING_ORDER)))
    times = []
    for frame in events:
        if frame.label is None:
            raise ValueError("every test event must be labeled")
        t0 = time.perf_counter()
        result = classify(frame, model, config)
        times.append((time.perf_counter() - t0) * 1000.0)
        counts[_RING_INDEX[frame.label], _RING_INDEX[result.winner]] += 1

    row_sums = counts.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_seg = np.where(row_sums > 0, np.diag(counts) / row_sums, np.nan)
    total = counts.sum()
    overall = float(np.trace(counts) / total)
    macro = float(np.nanmean(per_seg))

    errors = total - np.trace(counts)
    if errors > 0:
        neighbor = 0.0
        for i in range(len(RING_ORDER)):
            a, b = _ring_neighbors(i)
            neighbor += counts[i, a] + counts[i, b]
        neighbor_fraction = float(neighbor / errors)
    else:
        neighbor_fraction = None

    times_arr = np.array(times)
    timing = {
        "mean": float(times_arr.mean()),
        "p50": float(np.percentile(times_arr, 50)),
        "p90": float(np.percentile(times_arr, 90)),
        "max": float(times_arr.max()),
    }
    return EvalReport(
        order=RING_ORDER,
        counts=counts,
        per_segment_accuracy={
            seg: float(per_seg[i]) for i, seg in enumerate(RING_ORDER)
        },
        overall_accuracy=overall,
        macro_accuracy=macro,
        timing_ms=timing,
        n_events=int(total),
        neighbor_error_fraction=neighbor_fraction,
        approach=model.approach,
        filter_variant=model.filter_variant,
    )


# -- corpus plumbing -------------------------------------------------------------


def match_events(
    events: Sequence[DetectionEvent],
    truth: Sequence[tuple[float, str]],
    window_ms: float = 500.0,
    rate_hz: float = 100.0,
) -> tuple[list[DetectionEvent], int, int]:
    """Label detected events against planted ground truth.

    An event matches the latest planted impact that starts no more than
    ``window_ms`` before the event's entry point.  Returns the labeled
    events, the number of distinct truth impacts detected, and the number
    of false (unmatched) events.
    """
    truth_sorted = sorted(truth)
    times = np.array([t for t, _ in truth_sorted])
    matched_truth: set[int] = set()
    labeled = []
    false_events = 0
    spacing_ms = 1000.0 / rate_hz
    for ev in events:
        t_entry = ev.frame.t_start + ev.frame.peak_index * spacing_ms
        i = int(np.searchsorted(times, t_entry, side="right")) - 1
        if i >= 0 and t_entry - times[i] <= window_ms:
            matched_truth.add(i)
            labeled.append(
                DetectionEvent(
                    entry_index=ev.entry_index,
                    frame=EventFrame(
                        channels=ev.frame.channels,
                        peak_index=ev.frame.peak_index,
                        t_start=ev.frame.t_start,
                        label=truth_sorted[i][1],
                        padded=ev.frame.padded,
                    ),
                )
            )
        else:
            false_events += 1
    return labeled, len(matched_truth), false_events


def detect_and_label(
    recordings: Sequence[tuple[SampleStream, Sequence[tuple[float, str]]]],
    detector_config: DetectorConfig | None = None,
    filter_on: bool = False,
) -> tuple[list[EventFrame], dict]:
    """Run detection over labeled recordings; return labeled frames plus
    detection statistics (planted/detected/false counts)."""
    coeffs = None
    frames: list[EventFrame] = []
    planted = detected = false_events = 0
    for stream, truth in recordings:
        if filter_on:
            if coeffs is None:
                coeffs = design_lowpass(FilterSpec(sample_rate_hz=stream.rate_hz))
            stream = apply_filter(coeffs, stream)
        events = detect_events(stream, detector_config)
        labeled, n_detected, n_false = match_events(events, truth, rate_hz=stream.rate_hz)
        frames.extend(ev.frame for ev in labeled)
        planted += len(truth)
        detected += n_detected
        false_events += n_false
    stats = {
        "planted": planted,
        "detected": detected,
        "false_events": false_events,
        "recall": detected / planted if planted else float("nan"),
        "frames": len(frames),
    }
    return frames, stats


@dataclass(frozen=True)
class ArmsReport:
    """Reports for every (approach, filter) arm on a shared corpus."""

    reports: Mapping[tuple[str, str], EvalReport]
    detection: Mapping[str, dict]

    def to_dict(self) -> dict:
        return {
            "arms": {
                f"{a}|{f}": r.to_dict() for (a, f), r in sorted(self.reports.items())
            },
            "detection": dict(self.detection),
        }


def compare_arms(
    train: Sequence[tuple[SampleStream, Sequence[tuple[float, str]]]],
    test: Sequence[tuple[SampleStream, Sequence[tuple[float, str]]]],
    approaches: Sequence[str] = APPROACHES,
    detector_config: DetectorConfig | None = None,
    kmeans_seed: int | None = None,
    config: DtwConfig | None = None,
) -> ArmsReport:
    """Six evaluations on identical events per filter arm.

    Within a filter variant all approaches see exactly the same detected
    test events; detection itself runs on the same variant as
    classification.
    """
    from .templates import DEFAULT_KMEANS_SEED

    seed = DEFAULT_KMEANS_SEED if kmeans_seed is None else kmeans_seed
    reports: dict[tuple[str, str], EvalReport] = {}
    detection: dict[str, dict] = {}
    for variant, filter_on in (("off", False), ("on", True)):
        train_frames, train_stats = detect_and_label(train, detector_config, filter_on)
        test_frames, test_stats = detect_and_label(test, detector_config, filter_on)
        detection[variant] = {"train": train_stats, "test": test_stats}
        models = build_models(
            train_frames, list(approaches), filter_variant=variant, seed=seed, config=config
        )
        for approach in approaches:
            reports[(approach, variant)] = evaluate(models[approach], test_frames, config)
    return ArmsReport(reports=reports, detection=detection)


def time_per_event(
    models: Mapping[str, SegmentModel],
    events: Sequence[EventFrame],
    config: DtwConfig | None = None,
    repeats: int = 1,
) -> dict[str, float]:
    """Mean per-event classification wall time (ms) per approach.

    Arms are interleaved per event so drift in machine load spreads evenly
    across them; a warm-up pass runs first.
    """
    names = list(models)
    for frame in events[: min(3, len(events))]:
        for name in names:
            classify(frame, models[name], config)
    totals = {name: 0.0 for name in names}
    for _ in range(repeats):
        for frame in events:
            for name in names:
                t0 = time.perf_counter()
                classify(frame, models[name], config)
                totals[name] += time.perf_counter() - t0
    n = len(events) * repeats
    return {name: totals[name] / n * 1000.0 for name in names}
