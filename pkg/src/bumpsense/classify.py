"""Assign a detected event frame to one of the 12 segments.

For each channel the model carries, the frame's warping distance to every
segment's templates is reduced to a scale-free ratio (each channel's
distances divided by that channel's worst segment, bounding every
contribution to (0, 1] so no single channel overweights the decision).
The winner is the segment with the smallest Euclidean norm over its
channel ratios.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import EventFrame, SEGMENT_IDS
from .dtw import DtwConfig, dtw_distance
from .templates import APPROACH_MULTI, SegmentModel

#: Normalize each segment's distance by the per-channel maximum across
#: segments (default), or by the min/max within each segment's own
#: template set (only meaningful for multi-template models).
RATIO_ACROSS_SEGMENTS = "across_segments"
RATIO_WITHIN_SET = "within_set"


@dataclass(frozen=True)
class ClassificationResult:
    """Winning segment plus the full per-segment evidence."""

    winner: str
    norms: Mapping[str, float]
    per_channel_ratios: Mapping[str, tuple[float, ...]]
    elapsed_ms: float
    approach: str
    warnings: tuple[str, ...] = ()


def segment_channel_distance(
    frame: EventFrame,
    model: SegmentModel,
    segment: str,
    channel: str,
    config: DtwConfig | None = None,
) -> float:
    """Frame-to-segment distance on one channel.

    Multi-template models take the minimum over the segment's template
    set; merged models the distance to their single template.
    """
    try:
        templates = model.templates[segment][channel]
    except KeyError:
        raise ValueError(
            f"model ({model.approach}) has no templates for {segment}/{channel}"
        ) from None
    values = frame.channels[channel]
    return min(dtw_distance(values, t.values, config) for t in templates)


def _channel_distances(
    frame: EventFrame, model: SegmentModel, channel: str, config: DtwConfig | None
) -> np.ndarray:
    return np.array(
        [segment_channel_distance(frame, model, seg, channel, config) for seg in SEGMENT_IDS]
    )


def classify(
    frame: EventFrame,
    model: SegmentModel,
    config: DtwConfig | None = None,
    ratio_mode: str = RATIO_ACROSS_SEGMENTS,
) -> ClassificationResult:
    """Score all 12 segments and pick the lowest-norm one.

    Ties break by catalog order.  A channel on which every segment scores
    zero contributes zero ratios and records a warning instead of failing.
    """
    if frame.frame_len != model.frame_len:
        raise ValueError(
            f"frame length {frame.frame_len} != model frame length {model.frame_len}"
        )
    if ratio_mode not in (RATIO_ACROSS_SEGMENTS, RATIO_WITHIN_SET):
        raise ValueError(f"unknown ratio mode {ratio_mode!r}")
    if ratio_mode == RATIO_WITHIN_SET and model.approach != APPROACH_MULTI:
        raise ValueError(
            "within-set ratios need a template set per segment; "
            f"the {model.approach} model carries a single merged template"
        )
    t0 = time.perf_counter()
    warnings: list[str] = []
    ratio_rows = []
    per_channel: dict[str, np.ndarray] = {}
    for chan in model.channels:
        if ratio_mode == RATIO_WITHIN_SET:
            ratios = np.empty(len(SEGMENT_IDS))
            for i, seg in enumerate(SEGMENT_IDS):
                dists = [
                    dtw_distance(frame.channels[chan], t.values, config)
                    for t in model.templates[seg][chan]
                ]
                worst = max(dists)
                ratios[i] = min(dists) / worst if worst > 0 else 0.0
        else:
            dists = _channel_distances(frame, model, chan, config)
            worst = float(dists.max())
            if worst == 0.0:
                warnings.append(f"all distances zero on channel {chan}; ratios set to 0")
                ratios = np.zeros(len(SEGMENT_IDS))
            else:
                ratios = dists / worst
        per_channel[chan] = ratios
        ratio_rows.append(ratios)

    norms = np.sqrt(np.sum(np.square(np.stack(ratio_rows)), axis=0))
    winner_idx = int(np.argmin(norms))
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return ClassificationResult(
        winner=SEGMENT_IDS[winner_idx],
        norms={seg: float(norms[i]) for i, seg in enumerate(SEGMENT_IDS)},
        per_channel_ratios={
            seg: tuple(float(per_channel[c][i]) for c in model.channels)
            for i, seg in enumerate(SEGMENT_IDS)
        },
        elapsed_ms=elapsed_ms,
        approach=model.approach,
        warnings=tuple(warnings),
    )
