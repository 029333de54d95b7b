"""Detection and 12-segment directional classification of low-force impacts
on parked vehicles, from streaming 6-axis inertial data."""

from .classify import (
    RATIO_ACROSS_SEGMENTS,
    RATIO_WITHIN_SET,
    ClassificationResult,
    classify,
    segment_channel_distance,
)
from .core import (
    CATALOG,
    CHANNELS,
    CORNER_PAIRS,
    DEFAULT_FRAME_LEN,
    DEFAULT_PADDING,
    DEFAULT_RATE_HZ,
    SEGMENT_IDS,
    EventFrame,
    SampleStream,
    SegmentClass,
    SensorSample,
    StreamOrderError,
    StreamRateError,
    make_stream,
    segment_by_id,
    segment_catalog,
    stream_from_arrays,
)
from .detect import (
    DetectionEvent,
    DetectorConfig,
    EventDetector,
    PeakState,
    detect_events,
    detect_peak_step,
)
from .dtw import DtwConfig, dtw_cost_matrix, dtw_distance
from .evaluate import (
    RING_ORDER,
    ArmsReport,
    EvalReport,
    compare_arms,
    detect_and_label,
    evaluate,
    match_events,
    time_per_event,
)
from .filtering import (
    FilterCoefficients,
    FilterDesignError,
    FilterSpec,
    StreamingFilter,
    apply_filter,
    design_lowpass,
)
from .live import StreamPipeline, UdpListener, replay_stream_udp, run_pipeline_on_stream
from .synth import (
    ImpactSpec,
    Signature,
    generate_recording,
    impact_signature,
    jittered_specs,
    segment_recording,
    standard_corpus,
)
from .templates import (
    APPROACH_MEAN,
    APPROACH_MEDIAN,
    APPROACH_MULTI,
    APPROACHES,
    SegmentModel,
    Template,
    TrainingDataError,
    build_model,
    build_models,
    load_model,
    merge_mean,
    merge_median,
    model_from_json,
    model_to_json,
    prune_candidates,
    save_model,
    select_top_k,
)

__version__ = "0.1.0"
