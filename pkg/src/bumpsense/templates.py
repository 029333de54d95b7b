"""Per-segment reference models built from labeled event frames.

Three model flavors share one pipeline per segment and channel: prune the
candidate frames (2-means on each frame's mean warping distance to the
others, keeping the tighter cluster), keep the 10 most self-similar of the
survivors, then either retain the set (multi) or merge it into a single
pointwise mean or median template.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import EventFrame, SEGMENT_IDS
from .dtw import DtwConfig, dtw_distance

logger = logging.getLogger(__name__)

APPROACH_MULTI = "multi"
APPROACH_MEAN = "mean"
APPROACH_MEDIAN = "median"
APPROACHES = (APPROACH_MULTI, APPROACH_MEAN, APPROACH_MEDIAN)

#: Channels carried per approach: the multi-template model matches the two
#: acceleration axes; the merged models add the yaw rate.
APPROACH_CHANNELS: dict[str, tuple[str, ...]] = {
    APPROACH_MULTI: ("ay", "ax"),
    APPROACH_MEAN: ("ay", "ax", "rz"),
    APPROACH_MEDIAN: ("ay", "ax", "rz"),
}

DEFAULT_TOP_K = 10
DEFAULT_KMEANS_SEED = 7
KMEANS_MAX_ITER = 100

MODEL_FORMAT = "bumpsense-model"
MODEL_VERSION = 1


class TrainingDataError(ValueError):
    """Training corpus cannot produce a complete model."""


@dataclass(frozen=True)
class Template:
    """A per-segment, per-channel reference signal."""

    segment: str
    channel: str
    values: np.ndarray
    provenance: str

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.shape[0] == 0:
            raise ValueError("template values must be a nonempty 1-D sequence")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SegmentModel:
    """Trained reference model: segment -> channel -> template tuple."""

    approach: str
    filter_variant: str
    frame_len: int
    rate_hz: float
    templates: Mapping[str, Mapping[str, tuple[Template, ...]]]
    kmeans_seed: int = DEFAULT_KMEANS_SEED

    def __post_init__(self) -> None:
        if self.approach not in APPROACHES:
            raise ValueError(f"unknown approach {self.approach!r}")
        if self.filter_variant not in ("on", "off"):
            raise ValueError(f"filter_variant must be 'on'/'off', got {self.filter_variant!r}")
        expected = APPROACH_CHANNELS[self.approach]
        missing = [s for s in SEGMENT_IDS if s not in self.templates]
        if missing:
            raise ValueError(f"model missing segments: {missing}")
        for seg in SEGMENT_IDS:
            chans = self.templates[seg]
            if tuple(chans.keys()) != expected:
                raise ValueError(
                    f"segment {seg}: channels {tuple(chans.keys())} != {expected}"
                )
            for chan, tpls in chans.items():
                if self.approach in (APPROACH_MEAN, APPROACH_MEDIAN) and len(tpls) != 1:
                    raise ValueError(
                        f"{self.approach} model must carry exactly one template "
                        f"per channel, got {len(tpls)} for {seg}/{chan}"
                    )
                if not tpls:
                    raise ValueError(f"no templates for {seg}/{chan}")
                for t in tpls:
                    if t.values.shape[0] != self.frame_len:
                        raise ValueError(
                            f"template length {t.values.shape[0]} != frame_len {self.frame_len}"
                        )

    @property
    def channels(self) -> tuple[str, ...]:
        return APPROACH_CHANNELS[self.approach]


# -- distance features ---------------------------------------------------------


def pairwise_dtw_matrix(
    sequences: Sequence[np.ndarray], config: DtwConfig | None = None
) -> np.ndarray:
    """Symmetric matrix of warping distances between all sequence pairs."""
    n = len(sequences)
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = dtw_distance(sequences[i], sequences[j], config)
            dist[i, j] = d
            dist[j, i] = d
    return dist


def _mean_distance_features(dist: np.ndarray) -> np.ndarray:
    """Each candidate's mean distance to all the others."""
    n = dist.shape[0]
    if n < 2:
        return np.zeros(n)
    return dist.sum(axis=1) / (n - 1)


def _kmeans_two_scalar(features: np.ndarray, seed: int) -> np.ndarray:
    """2-means (k-means++ style seeding, <= 100 iterations) on scalars.

    Called on canonically ordered input so results are independent of the
    caller's frame order.  Returns boolean membership of cluster 0.
    """
    rng = np.random.default_rng(seed)
    n = features.shape[0]
    c0 = features[int(rng.integers(n))]
    sq = (features - c0) ** 2
    total = sq.sum()
    if total == 0:
        return np.ones(n, dtype=bool)
    c1 = features[int(rng.choice(n, p=sq / total))]
    centers = np.array([c0, c1])
    assign = np.abs(features[:, None] - centers[None, :]).argmin(axis=1)
    for _ in range(KMEANS_MAX_ITER):
        for k in (0, 1):
            if np.any(assign == k):
                centers[k] = features[assign == k].mean()
        new_assign = np.abs(features[:, None] - centers[None, :]).argmin(axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return assign == 0


def _canonical_order(frames: Sequence[EventFrame], features: np.ndarray) -> np.ndarray:
    """Sort by (feature, timestamp) so shuffled corpora cluster identically."""
    t_start = np.array([f.t_start for f in frames])
    return np.lexsort((t_start, features))


def _prune_keep_indices(
    frames: Sequence[EventFrame], dist: np.ndarray, seed: int
) -> np.ndarray:
    """Indices (sorted, original order) of the frames surviving pruning."""
    everything = np.arange(len(frames))
    if len(frames) < 4:
        logger.warning("only %d candidates; skipping pruning", len(frames))
        return everything
    features = _mean_distance_features(dist)
    if np.ptp(features) == 0:
        return everything
    order = _canonical_order(frames, features)
    in_zero = _kmeans_two_scalar(features[order], seed)
    if np.all(in_zero) or not np.any(in_zero):
        return everything
    groups = [order[in_zero], order[~in_zero]]
    # spread = sample standard deviation; a singleton cluster has no
    # defined spread and cannot win (it is the isolated outlier anyway)
    spreads = [
        float(np.std(features[g], ddof=1)) if len(g) > 1 else float("inf")
        for g in groups
    ]
    means = [float(np.mean(features[g])) for g in groups]
    if spreads[0] < spreads[1] or (spreads[0] == spreads[1] and means[0] <= means[1]):
        keep = groups[0]
    else:
        keep = groups[1]
    return np.sort(keep)


def prune_candidates(
    frames: Sequence[EventFrame],
    channel: str,
    seed: int = DEFAULT_KMEANS_SEED,
    config: DtwConfig | None = None,
    _dist: np.ndarray | None = None,
) -> list[EventFrame]:
    """Drop the wider-spread distance cluster of candidate frames.

    Features are each frame's mean warping distance to all others on the
    chosen channel; 2-means splits them and the cluster whose features have
    the smaller standard deviation survives.  Fewer than 4 candidates, or
    all-identical candidates, pass through unpruned.
    """
    frames = list(frames)
    dist = (
        _dist
        if _dist is not None
        else pairwise_dtw_matrix([f.channels[channel] for f in frames], config)
        if len(frames) >= 4
        else np.zeros((len(frames), len(frames)))
    )
    keep = _prune_keep_indices(frames, dist, seed)
    return [frames[i] for i in keep]


def select_top_k(
    frames: Sequence[EventFrame],
    channel: str,
    k: int = DEFAULT_TOP_K,
    config: DtwConfig | None = None,
    _dist: np.ndarray | None = None,
) -> tuple[Template, ...]:
    """The ``k`` candidates with the lowest mean distance to the others.

    Ties break toward the earlier recording timestamp.  A pool smaller
    than ``k`` is returned whole with a warning.
    """
    frames = list(frames)
    if not frames:
        raise ValueError("no candidate frames")
    if len(frames) < k:
        logger.warning("only %d candidates for top-%d selection; taking all", len(frames), k)
    dist = (
        _dist
        if _dist is not None
        else pairwise_dtw_matrix([f.channels[channel] for f in frames], config)
    )
    features = _mean_distance_features(dist)
    t_start = np.array([f.t_start for f in frames])
    order = np.lexsort((t_start, features))[: min(k, len(frames))]
    out = []
    for i in order:
        f = frames[i]
        out.append(
            Template(
                segment=f.label or "?",
                channel=channel,
                values=f.channels[channel],
                provenance=f"event@{f.t_start:g}ms",
            )
        )
    return tuple(out)


def _merged(templates: Sequence[Template], reducer, provenance: str) -> Template:
    if not templates:
        raise ValueError("nothing to merge")
    first = templates[0]
    for t in templates[1:]:
        if t.values.shape != first.values.shape:
            raise ValueError(
                f"template length mismatch: {t.values.shape[0]} != {first.values.shape[0]}"
            )
        if (t.segment, t.channel) != (first.segment, first.channel):
            raise ValueError("templates to merge must share segment and channel")
    stack = np.stack([t.values for t in templates])
    return Template(
        segment=first.segment,
        channel=first.channel,
        values=reducer(stack, axis=0),
        provenance=provenance,
    )


def merge_mean(templates: Sequence[Template]) -> Template:
    """Pointwise arithmetic mean across aligned templates."""
    return _merged(templates, np.mean, "merged-mean")


def merge_median(templates: Sequence[Template]) -> Template:
    """Pointwise median; an even count averages the two middle values."""
    return _merged(templates, np.median, "merged-median")


# -- model assembly ------------------------------------------------------------


def _group_by_segment(frames: Iterable[EventFrame]) -> dict[str, list[EventFrame]]:
    groups: dict[str, list[EventFrame]] = {}
    for f in frames:
        if f.label is None:
            raise TrainingDataError("training frames must be labeled")
        groups.setdefault(f.label, []).append(f)
    return groups


def build_models(
    frames: Sequence[EventFrame],
    approaches: Sequence[str],
    filter_variant: str = "off",
    k: int = DEFAULT_TOP_K,
    seed: int = DEFAULT_KMEANS_SEED,
    config: DtwConfig | None = None,
    rate_hz: float = 100.0,
) -> dict[str, SegmentModel]:
    """Train several approaches at once, sharing the per-channel distance
    matrices (the expensive part)."""
    for a in approaches:
        if a not in APPROACHES:
            raise ValueError(f"unknown approach {a!r}")
    groups = _group_by_segment(frames)
    missing = [s for s in SEGMENT_IDS if s not in groups]
    if missing:
        raise TrainingDataError(f"training corpus missing segments: {missing}")
    short = {s: len(g) for s, g in groups.items() if len(g) < 50}
    if short:
        logger.warning("segments with fewer than 50 training frames: %s", short)
    frame_lens = {f.frame_len for f in frames}
    if len(frame_lens) != 1:
        raise TrainingDataError(f"mixed frame lengths in corpus: {sorted(frame_lens)}")
    frame_len = frame_lens.pop()

    needed_channels = sorted({c for a in approaches for c in APPROACH_CHANNELS[a]})
    selected: dict[tuple[str, str], tuple[Template, ...]] = {}
    for seg in SEGMENT_IDS:
        seg_frames = groups[seg]
        for chan in needed_channels:
            dist = pairwise_dtw_matrix([f.channels[chan] for f in seg_frames], config)
            keep = _prune_keep_indices(seg_frames, dist, seed)
            pruned = [seg_frames[i] for i in keep]
            sub_dist = dist[np.ix_(keep, keep)]
            selected[(seg, chan)] = select_top_k(pruned, chan, k=k, _dist=sub_dist)

    models = {}
    for approach in approaches:
        templates: dict[str, dict[str, tuple[Template, ...]]] = {}
        for seg in SEGMENT_IDS:
            per_chan = {}
            for chan in APPROACH_CHANNELS[approach]:
                tpls = selected[(seg, chan)]
                if approach == APPROACH_MEAN:
                    per_chan[chan] = (merge_mean(tpls),)
                elif approach == APPROACH_MEDIAN:
                    per_chan[chan] = (merge_median(tpls),)
                else:
                    per_chan[chan] = tpls
            templates[seg] = per_chan
        models[approach] = SegmentModel(
            approach=approach,
            filter_variant=filter_variant,
            frame_len=frame_len,
            rate_hz=rate_hz,
            templates=templates,
            kmeans_seed=seed,
        )
    return models


def build_model(
    frames: Sequence[EventFrame],
    approach: str,
    filter_variant: str = "off",
    k: int = DEFAULT_TOP_K,
    seed: int = DEFAULT_KMEANS_SEED,
    config: DtwConfig | None = None,
    rate_hz: float = 100.0,
) -> SegmentModel:
    """Train one model; see :func:`build_models`."""
    return build_models(frames, [approach], filter_variant, k, seed, config, rate_hz)[
        approach
    ]


# -- serialization -------------------------------------------------------------


def model_to_json(model: SegmentModel) -> str:
    """Self-describing, deterministic JSON (floats keep exact round trips)."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "approach": model.approach,
        "filter": model.filter_variant,
        "frame_len": model.frame_len,
        "rate_hz": model.rate_hz,
        "kmeans_seed": model.kmeans_seed,
        "segments": {
            seg: {
                chan: [
                    {"provenance": t.provenance, "values": [float(v) for v in t.values]}
                    for t in model.templates[seg][chan]
                ]
                for chan in model.channels
            }
            for seg in SEGMENT_IDS
        },
    }
    return json.dumps(doc, indent=None, separators=(",", ":"))


def model_from_json(text: str) -> SegmentModel:
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    templates = {
        seg: {
            chan: tuple(
                Template(
                    segment=seg,
                    channel=chan,
                    values=np.array(t["values"], dtype=np.float64),
                    provenance=t["provenance"],
                )
                for t in chans[chan]
            )
            for chan in APPROACH_CHANNELS[doc["approach"]]
        }
        for seg, chans in doc["segments"].items()
    }
    return SegmentModel(
        approach=doc["approach"],
        filter_variant=doc["filter"],
        frame_len=int(doc["frame_len"]),
        rate_hz=float(doc["rate_hz"]),
        templates=templates,
        kmeans_seed=int(doc["kmeans_seed"]),
    )


def save_model(model: SegmentModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> SegmentModel:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
